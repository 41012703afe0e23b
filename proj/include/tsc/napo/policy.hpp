#pragma once

#include <memory>
#include <random>

#include "tsc/control/controllers.hpp"
#include "tsc/napo/networks.hpp"

namespace tsc::napo {

/// Decides with a trained actor. Greedy takes the most probable phase
/// (lowest id on ties); otherwise phases are sampled.
class PolicyController : public control::Controller {
 public:
  PolicyController(std::shared_ptr<const ActorNetwork> actor, bool greedy = true);
  std::string name() const override { return "napo"; }
  void reset(std::uint64_t seed) override;
  control::ControllerDecision decide(const encoding::Environment& env) override;

  /// Attention weights of the last decision (agents x heads*4).
  const Mat& last_attention() const { return last_alpha_; }

 private:
  std::shared_ptr<const ActorNetwork> actor_;
  bool greedy_;
  std::mt19937_64 rng_;
  Tensor hidden_;
  Mat last_alpha_;
};

}  // namespace tsc::napo
