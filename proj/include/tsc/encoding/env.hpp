#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "tsc/encoding/observation.hpp"
#include "tsc/encoding/state.hpp"
#include "tsc/traffic/simulation.hpp"

namespace tsc::encoding {

struct EnvConfig {
  traffic::SimConfig sim{};
  StateKind kind = StateKind::QDSE;
  EncodingConfig encoding{};
  double noise_sigma = 0.0;  // m, on D_fr of QDSE observations
  double episode_length = 3600.0;
};

/// Multi-agent wrapper: one agent per intersection, one decision per interval.
class Environment {
 public:
  Environment(std::shared_ptr<const traffic::RoadNetwork> network, EnvConfig config);

  void reset(std::vector<traffic::ScheduledVehicle> schedule, std::uint64_t noise_seed);

  /// Applies one phase per agent and advances one decision interval.
  /// Returns per-agent rewards.
  std::vector<double> step(std::span<const int> actions);

  bool done() const { return decision_step_ >= horizon_steps_; }
  int decision_step() const { return decision_step_; }
  int horizon_steps() const { return horizon_steps_; }
  int num_agents() const { return network_->num_intersections(); }
  int state_dim() const { return state_dim_; }

  const std::vector<Observation>& observations() const { return observations_; }
  const std::vector<IntersectionMeasurement>& measurements() const { return measurements_; }
  /// Clean stopped counts of the 24 tracked lanes per agent, scaled by lane capacity.
  std::vector<std::array<double, traffic::kTrackedLanes>> queue_targets() const;

  const traffic::Simulation& sim() const { return sim_; }
  traffic::Simulation& sim() { return sim_; }
  const EnvConfig& config() const { return config_; }
  const traffic::RoadNetwork& network() const { return *network_; }

 private:
  void refresh_observations();

  std::shared_ptr<const traffic::RoadNetwork> network_;
  EnvConfig config_;
  traffic::Simulation sim_;
  std::mt19937_64 noise_rng_;
  std::vector<IntersectionMeasurement> measurements_;
  std::vector<Observation> observations_;
  int state_dim_ = 0;
  int horizon_steps_ = 0;
  int decision_step_ = 0;
};

}  // namespace tsc::encoding
