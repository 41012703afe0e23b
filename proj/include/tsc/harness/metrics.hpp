#pragma once

#include <vector>

#include "json.hpp"
#include "tsc/encoding/env.hpp"
#include "tsc/traffic/simulation.hpp"

namespace tsc::harness {

/// Mean of (t_end - t_start); non-arrivals already end at the horizon.
/// Throws ValidationError on an empty list.
double avg_travel_time(const std::vector<traffic::TripRecord>& records);

struct EpisodeMetrics {
  long vehicles = 0;          // inserted vehicles
  long never_inserted = 0;    // released but never found room on their entry lane
  bool empty = true;          // no vehicle entered; travel time is then 0
  double avg_travel_time = 0.0;
  double mean_queue = 0.0;    // stopped vehicles on incoming lanes per intersection
  double queue_std = 0.0;     // std across intersections of their mean queue
  double mean_speed = 0.0;    // m/s over vehicles in the network, averaged over decisions
  double mean_reward = 0.0;   // per agent per decision, unscaled
  std::vector<double> intersection_travel_time;
};

nlohmann::json to_json(const EpisodeMetrics& m);

/// Collects per-decision samples over one episode.
class MetricsAccumulator {
 public:
  void observe(const encoding::Environment& env, const std::vector<double>& rewards);
  EpisodeMetrics finish(const encoding::Environment& env) const;

 private:
  std::vector<double> queue_sum_;  // per intersection
  double speed_sum_ = 0.0;
  double reward_sum_ = 0.0;
  long reward_count_ = 0;
  long samples_ = 0;
};

}  // namespace tsc::harness
