#include "tsc/napo/policy.hpp"

#include "tsc/error.hpp"
#include "tsc/napo/trainer.hpp"

namespace tsc::napo {

PolicyController::PolicyController(std::shared_ptr<const ActorNetwork> actor, bool greedy)
    : actor_(std::move(actor)), greedy_(greedy) {
  if (!actor_) throw ValidationError("policy controller needs an actor");
}

void PolicyController::reset(std::uint64_t seed) {
  rng_.seed(seed);
  hidden_ = Tensor();
}

control::ControllerDecision PolicyController::decide(const encoding::Environment& env) {
  nn::NoGradGuard no_grad;
  const auto& obs = env.observations();
  if (static_cast<int>(obs.size()) != actor_->config().num_agents) {
    throw ValidationError("policy was trained for " + std::to_string(actor_->config().num_agents) +
                          " agents, environment has " + std::to_string(obs.size()));
  }
  if (!hidden_.defined()) hidden_ = actor_->initial_hidden(static_cast<long>(obs.size()));
  const ActorOutput out = actor_->forward(make_step_input(obs), hidden_);
  hidden_ = out.hidden;
  last_alpha_ = out.alpha;
  control::ControllerDecision d;
  const Mat probs = out.log_probs.value().array().exp();
  if (!probs.allFinite()) throw TrainingFault("policy produced non-finite probabilities");
  for (long i = 0; i < probs.rows(); ++i) {
    if (greedy_) {
      control::PhaseScores scores{};
      for (int a = 0; a < traffic::kNumPhases; ++a) scores[a] = probs(i, a);
      d.scores.push_back(scores);
      d.phases.push_back(control::argmax_lowest(scores));
    } else {
      d.phases.push_back(sample_action(probs.row(i), rng_));
    }
  }
  return d;
}

}  // namespace tsc::napo
