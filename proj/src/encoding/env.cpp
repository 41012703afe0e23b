#include "tsc/encoding/env.hpp"

#include <cmath>
#include <string>

#include "tsc/error.hpp"

namespace tsc::encoding {

Environment::Environment(std::shared_ptr<const traffic::RoadNetwork> network, EnvConfig config)
    : network_(std::move(network)), config_(config), sim_(network_, config.sim) {
  const double steps = config_.episode_length / config_.sim.decision_interval;
  if (std::abs(steps - std::round(steps)) > 1e-9 || steps < 1.0) {
    throw ValidationError("decision interval must divide the episode length");
  }
  if (config_.noise_sigma < 0.0) throw ValidationError("noise sigma must be non-negative");
  if (config_.noise_sigma > 0.0 && config_.kind != StateKind::QDSE) {
    throw ValidationError("sensor noise is only defined for the QDSE state");
  }
  horizon_steps_ = static_cast<int>(std::lround(steps));
  state_dim_ = encoding::state_dim(config_.kind, *network_, config_.encoding);
}

void Environment::reset(std::vector<traffic::ScheduledVehicle> schedule, std::uint64_t noise_seed) {
  sim_.reset(std::move(schedule));
  noise_rng_.seed(noise_seed);
  decision_step_ = 0;
  measurements_ = sim_.measure_all();
  refresh_observations();
}

std::vector<double> Environment::step(std::span<const int> actions) {
  if (static_cast<int>(actions.size()) != num_agents()) {
    throw ValidationError("expected " + std::to_string(num_agents()) + " actions, got " +
                          std::to_string(actions.size()));
  }
  if (done()) throw ValidationError("episode already finished; call reset");
  measurements_ = sim_.advance_decision_interval(actions);
  ++decision_step_;
  std::vector<double> rewards;
  rewards.reserve(measurements_.size());
  for (const auto& m : measurements_) rewards.push_back(compute_reward(m));
  refresh_observations();
  return rewards;
}

void Environment::refresh_observations() {
  std::vector<std::vector<double>> states;
  states.reserve(measurements_.size());
  for (const auto& m : measurements_) {
    if (config_.kind == StateKind::QDSE && config_.noise_sigma > 0.0) {
      const QdseVector noisy =
          apply_sensor_noise(compute_qdse(m, config_.encoding.follow_window), config_.noise_sigma, noise_rng_);
      states.push_back(compute_state(config_.kind, m, *network_, config_.encoding, &noisy));
    } else {
      states.push_back(compute_state(config_.kind, m, *network_, config_.encoding));
    }
  }
  observations_.clear();
  for (int i = 0; i < num_agents(); ++i) {
    observations_.push_back(assemble_observation(i, states, *network_, decision_step_));
  }
}

std::vector<std::array<double, traffic::kTrackedLanes>> Environment::queue_targets() const {
  std::vector<std::array<double, traffic::kTrackedLanes>> out;
  const auto& idm = config_.encoding.idm;
  for (const auto& m : measurements_) {
    auto q = encoding::queue_targets(m);
    for (int l = 0; l < traffic::kTrackedLanes; ++l) {
      const auto& lane = l < kLanesPerIntersection ? m.incoming[l] : m.outgoing[l - kLanesPerIntersection];
      q[l] /= lane.length / (idm.s0 + idm.length);
    }
    out.push_back(q);
  }
  return out;
}

}  // namespace tsc::encoding
