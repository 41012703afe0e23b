#include "tsc/harness/metrics.hpp"

#include <cmath>

#include "tsc/error.hpp"

namespace tsc::harness {

double avg_travel_time(const std::vector<traffic::TripRecord>& records) {
  if (records.empty()) throw ValidationError("average travel time of an empty trip list");
  double total = 0.0;
  for (const auto& r : records) total += r.t_end - r.t_start;
  return total / static_cast<double>(records.size());
}

nlohmann::json to_json(const EpisodeMetrics& m) {
  return {{"vehicles", m.vehicles},
          {"never_inserted", m.never_inserted},
          {"empty", m.empty},
          {"avg_travel_time", m.avg_travel_time},
          {"mean_queue", m.mean_queue},
          {"queue_std", m.queue_std},
          {"mean_speed", m.mean_speed},
          {"mean_reward", m.mean_reward},
          {"intersection_travel_time", m.intersection_travel_time}};
}

void MetricsAccumulator::observe(const encoding::Environment& env, const std::vector<double>& rewards) {
  const auto& meas = env.measurements();
  queue_sum_.resize(meas.size(), 0.0);
  for (std::size_t i = 0; i < meas.size(); ++i) {
    for (const auto& lane : meas[i].incoming) queue_sum_[i] += lane.stopped;
  }
  speed_sum_ += env.sim().mean_speed();
  for (double r : rewards) reward_sum_ += r;
  reward_count_ += static_cast<long>(rewards.size());
  ++samples_;
}

EpisodeMetrics MetricsAccumulator::finish(const encoding::Environment& env) const {
  EpisodeMetrics m;
  const auto records = env.sim().trip_records();
  m.vehicles = static_cast<long>(records.size());
  m.never_inserted = env.sim().never_inserted();
  m.empty = records.empty();
  if (!m.empty) m.avg_travel_time = avg_travel_time(records);
  m.intersection_travel_time = env.sim().intersection_travel_times();
  if (samples_ > 0) {
    const double n = static_cast<double>(samples_);
    double mean = 0.0;
    for (double q : queue_sum_) mean += q / n;
    mean /= static_cast<double>(queue_sum_.size());
    double var = 0.0;
    for (double q : queue_sum_) var += (q / n - mean) * (q / n - mean);
    m.mean_queue = mean;
    m.queue_std = std::sqrt(var / static_cast<double>(queue_sum_.size()));
    m.mean_speed = speed_sum_ / n;
  }
  if (reward_count_ > 0) m.mean_reward = reward_sum_ / static_cast<double>(reward_count_);
  return m;
}

}  // namespace tsc::harness
