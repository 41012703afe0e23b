#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "tsc/encoding/env.hpp"
#include "tsc/harness/metrics.hpp"
#include "tsc/napo/checkpoint.hpp"
#include "tsc/napo/networks.hpp"

namespace tsc::napo {

struct TrainConfig {
  double gamma = 0.98;
  double lambda = 0.98;
  double clip_eps = 0.2;
  int epochs = 6;
  int batch_size = 720;  // agent-steps per update
  double lr_actor = 3e-4;
  double lr_critic = 5e-4;
  double entropy_weight = 0.01;
  double prediction_weight = 0.005;
  double value_weight = 0.5;
  double max_grad_norm = 10.0;
  double reward_scale = 0.05;  // applied to rewards before GAE and value targets
  int hidden = 128;
  int heads = 8;
  std::uint64_t seed = 1;

  void validate() const;
};

nlohmann::json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::json& j);

struct UpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double actor_prediction_loss = 0.0;
  double critic_prediction_loss = 0.0;
  double entropy = 0.0;  // -sum pi log pi, averaged
  double actor_grad_norm = 0.0;
  double critic_grad_norm = 0.0;
  int updates = 0;
};

struct EpisodeLog {
  int episode = 0;
  harness::EpisodeMetrics metrics;
  UpdateStats stats;
};

nlohmann::json to_json(const EpisodeLog& log);

/// Demand for a given training episode index.
using DemandFn = std::function<std::vector<traffic::ScheduledVehicle>(int episode)>;

/// Shared-parameter actor/critic training on one environment.
class Trainer {
 public:
  Trainer(std::shared_ptr<const traffic::RoadNetwork> network, encoding::EnvConfig env_config, TrainConfig config,
          DemandFn demand);

  /// Collects one episode, updating after every `batch_size` agent-steps.
  EpisodeLog train_episode();
  int episodes_done() const { return episode_; }

  ActorNetwork& actor() { return *actor_; }
  CriticNetwork& critic() { return *critic_; }
  const TrainConfig& config() const { return config_; }
  const encoding::Environment& env() const { return env_; }

  /// Written into every checkpoint header under "experiment".
  void set_experiment_info(nlohmann::json info) { experiment_ = std::move(info); }
  /// Where a snapshot goes when training halts on a non-finite value.
  void set_fault_snapshot_path(std::string path) { fault_path_ = std::move(path); }

  Checkpoint checkpoint() const;
  void save(const std::string& path) const;
  /// Restores parameters, optimizer moments, RNG and episode counter. The
  /// checkpoint must come from the same network and training config.
  void restore(const Checkpoint& ckpt);

  /// Decision step used during collection; exposed for tests.
  struct Decision {
    SequenceInput input;
    std::vector<int> actions;
    std::vector<double> log_probs;  // of the taken actions
    std::vector<double> values;
    Tensor actor_hidden_in, critic_hidden_in;
    Tensor actor_hidden_out, critic_hidden_out;
  };

 private:
  struct StepRecord {
    Decision decision;
    std::vector<double> rewards;  // scaled
    Mat queue_targets;            // agents x 24, next-step
  };

  Decision decide(const Tensor& actor_hidden, const Tensor& critic_hidden);
  void update(const std::vector<StepRecord>& steps, const std::vector<double>& bootstrap, UpdateStats& stats);
  [[noreturn]] void fault(const std::string& what);

  std::shared_ptr<const traffic::RoadNetwork> network_;
  TrainConfig config_;
  DemandFn demand_;
  encoding::Environment env_;
  NetworkConfig net_config_;
  std::unique_ptr<ActorNetwork> actor_;
  std::unique_ptr<CriticNetwork> critic_;
  std::unique_ptr<nn::Adam> actor_opt_;
  std::unique_ptr<nn::Adam> critic_opt_;
  std::mt19937_64 rng_;
  int episode_ = 0;
  nlohmann::json experiment_ = nlohmann::json::object();
  std::string fault_path_;
};

nlohmann::json to_json(const NetworkConfig& c);
NetworkConfig network_config_from_json(const nlohmann::json& j);

/// Copies parameters named `prefix/<name>` from a checkpoint.
void load_parameters(nn::ParameterSet& params, const Checkpoint& ckpt, const std::string& prefix);

/// Actor rebuilt from a trainer checkpoint.
std::shared_ptr<ActorNetwork> load_actor(const Checkpoint& ckpt);

/// Samples from a probability row; NaN or a row not summing to ~1 raises TrainingFault.
int sample_action(const Eigen::Ref<const Eigen::RowVectorXd>& probs, std::mt19937_64& rng);

}  // namespace tsc::napo
