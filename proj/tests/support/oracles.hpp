#pragma once

#include <algorithm>
#include <array>
#include <random>
#include <vector>

#include "tsc/traffic/network.hpp"
#include "tsc/traffic/simulation.hpp"

namespace tsc::testing {

// Random measurement for intersection `node`: each lane holds a random number
// of vehicles at distinct random positions, a random subset stopped.
inline traffic::IntersectionMeasurement random_measurement(const traffic::RoadNetwork& net, int node,
                                                           std::mt19937_64& rng) {
  traffic::IntersectionMeasurement m;
  m.intersection = node;
  std::uniform_int_distribution<int> count(0, 25);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto fill = [&](traffic::LaneMeasurement& lane, int id) {
    lane.lane = id;
    lane.length = net.lane(id).length;
    lane.speed_limit = net.lane(id).speed_limit;
    const int n = count(rng);
    std::vector<int> slots(static_cast<int>(lane.length / 7.5));
    for (int i = 0; i < static_cast<int>(slots.size()); ++i) slots[i] = i;
    std::shuffle(slots.begin(), slots.end(), rng);
    slots.resize(std::min<std::size_t>(n, slots.size()));
    std::sort(slots.begin(), slots.end());
    for (int s : slots) {
      const bool stopped = unit(rng) < 0.4;
      lane.vehicles.push_back({lane.length - 7.5 * s, stopped ? 0.0 : 1.0 + 9.0 * unit(rng), 5.0, stopped});
      (stopped ? lane.stopped : lane.moving) += 1;
    }
  };
  const auto& inter = net.intersection(node);
  for (int l = 0; l < traffic::kLanesPerIntersection; ++l) {
    fill(m.incoming[l], inter.incoming_lanes[l]);
    fill(m.outgoing[l], inter.outgoing_lanes[l]);
  }
  return m;
}

// Exhaustive scorers built from the network's movement list.
inline int lane_count(const traffic::IntersectionMeasurement& m, int lane) {
  for (const auto& l : m.incoming)
    if (l.lane == lane) return l.count();
  for (const auto& l : m.outgoing)
    if (l.lane == lane) return l.count();
  return 0;
}

inline int oracle_max_pressure(const traffic::RoadNetwork& net, const traffic::IntersectionMeasurement& m) {
  const auto& node = net.intersection(m.intersection);
  int best = -1;
  double best_score = 0.0;
  for (const auto& phase : traffic::standard_phases()) {
    double score = 0.0;
    for (const auto& mv : node.movements) {
      const int slot = traffic::slot_of(mv.approach, mv.turn);
      if (!((phase.green >> slot) & 1u)) continue;
      score += lane_count(m, mv.in_lane) - lane_count(m, mv.out_lane);
    }
    if (best < 0 || score > best_score) {
      best = phase.id;
      best_score = score;
    }
  }
  return best;
}

inline int oracle_advanced_mp(const traffic::RoadNetwork& net, const traffic::IntersectionMeasurement& m,
                              double range) {
  const auto& node = net.intersection(m.intersection);
  int best = -1;
  double best_score = 0.0;
  for (const auto& phase : traffic::standard_phases()) {
    double score = 0.0;
    for (int slot = 0; slot < traffic::kLanesPerIntersection; ++slot) {
      if (!((phase.green >> slot) & 1u)) continue;
      for (const auto& l : m.incoming) {
        if (l.lane != node.incoming_lanes[slot]) continue;
        for (const auto& v : l.vehicles) score += (v.stopped || l.length - v.x <= range) ? 1.0 : 0.0;
      }
    }
    if (best < 0 || score > best_score) {
      best = phase.id;
      best_score = score;
    }
  }
  return best;
}

}  // namespace tsc::testing
