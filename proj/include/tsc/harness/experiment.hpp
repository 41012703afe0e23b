#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "tsc/control/controllers.hpp"
#include "tsc/encoding/env.hpp"
#include "tsc/harness/metrics.hpp"
#include "tsc/napo/trainer.hpp"
#include "tsc/traffic/demand.hpp"
#include "tsc/traffic/grid.hpp"

namespace tsc::harness {

/// Everything an experiment needs, loadable from JSON:
///   network:  {"grid": {...GridSpec}} or {"roadnet": "path.json"}
///   flow:     {"synthetic": {...DemandSpec}} or {"file": "flow.json"}
/// Relative paths resolve against `base_dir`.
struct ExperimentConfig {
  traffic::GridSpec grid{};
  std::string roadnet;  // non-empty: CityFlow roadnet instead of the grid
  traffic::DemandSpec demand{};
  std::string flow;     // non-empty: CityFlow flow instead of synthetic demand
  std::string base_dir;

  std::string controller = "napo";
  encoding::StateKind state = encoding::StateKind::QDSE;
  control::FixedTimePlan fixed_time{};
  napo::TrainConfig train{};
  int episodes = 100;
  int checkpoint_every = 10;
  std::uint64_t train_demand_seed = 100000;  // training episode e uses this + e
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<double> noise_sigmas{0.0, 10.0, 20.0, 30.0};
  std::vector<std::string> ablation_states{"QDSE", "VC"};
  std::vector<std::uint64_t> ablation_seeds{1, 2, 3};
  double episode_length = 3600.0;
  double decision_interval = 5.0;
  double spawn_jitter = 0.0;

  void validate() const;
};

ExperimentConfig experiment_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& c);

std::string version_tag();

/// Resolved network and demand for one configuration.
class Experiment {
 public:
  explicit Experiment(ExperimentConfig config);

  const ExperimentConfig& config() const { return config_; }
  std::shared_ptr<const traffic::RoadNetwork> network() const { return network_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  encoding::EnvConfig env_config(double noise_sigma = 0.0) const;
  /// Synthetic demand drawn with `seed`, or the fixed flow file.
  std::vector<traffic::ScheduledVehicle> demand(std::uint64_t seed) const;
  napo::DemandFn training_demand() const;

  /// Baseline by name, or "napo" from `checkpoint` (greedy).
  std::unique_ptr<control::Controller> make_controller(const std::string& kind, const std::string& checkpoint) const;

 private:
  ExperimentConfig config_;
  std::shared_ptr<const traffic::RoadNetwork> network_;
  std::vector<traffic::ScheduledVehicle> file_flow_;
  std::vector<std::string> warnings_;
};

/// Evaluation worker threads from TSC_WORKERS (default 1).
int worker_count();

/// One episode per seed; the seed drives demand, sensor noise, spawn jitter
/// and any controller randomness.
nlohmann::json run_eval(const Experiment& exp, control::Controller& controller, double noise_sigma = 0.0);
nlohmann::json run_eval(const Experiment& exp, const std::string& controller, const std::string& checkpoint,
                        double noise_sigma = 0.0);

using Progress = std::function<void(const nlohmann::json&)>;

/// Trains into `out_dir`: curves.jsonl / curves.csv (one row per episode),
/// checkpoint.ckpt (latest), ckpt_<episode>.ckpt every checkpoint_every
/// episodes and summary.json. With `resume`, continues from checkpoint.ckpt.
/// The summary carries the mean queue and travel time over all training episodes.
nlohmann::json run_train(const Experiment& exp, const std::string& out_dir, bool resume = false,
                         const Progress& progress = {});

/// Evaluates the checkpoint at every configured sigma on the same seeds.
nlohmann::json run_noise_sweep(const Experiment& exp, const std::string& checkpoint);

/// Trains and evaluates each ablation state kind under each ablation seed.
/// Rows report the training-curve mean queue and the greedy evaluation.
nlohmann::json run_ablation(const Experiment& exp, const std::string& out_dir, const Progress& progress = {});

/// Loads a roadnet and any number of flow files and reports counts.
nlohmann::json ingest_check(const std::string& roadnet, const std::vector<std::string>& flows);

}  // namespace tsc::harness
