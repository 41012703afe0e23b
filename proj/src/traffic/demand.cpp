#include "tsc/traffic/demand.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "tsc/error.hpp"

namespace tsc::traffic {
namespace {

// True when the boundary can be reached from `node` without entering a
// visited intersection (`node` itself counts as entered).
bool can_escape(const RoadNetwork& net, int node, std::vector<bool> visited) {
  std::vector<int> frontier{node};
  visited[node] = true;
  while (!frontier.empty()) {
    const int at = frontier.back();
    frontier.pop_back();
    for (int out : net.intersection(at).outgoing_links) {
      if (out < 0) continue;
      const int dest = net.link(out).to;
      if (dest == kBoundary) return true;
      if (!visited[dest]) {
        visited[dest] = true;
        frontier.push_back(dest);
      }
    }
  }
  return false;
}

std::vector<int> random_route(const RoadNetwork& net, int entry, const std::array<double, 3>& probs,
                              std::mt19937_64& rng) {
  std::vector<int> route{entry};
  std::vector<bool> visited(net.num_intersections(), false);
  int link = entry;
  while (net.link(link).to != kBoundary) {
    const Link& cur = net.link(link);
    const Intersection& node = net.intersection(cur.to);
    visited[cur.to] = true;
    std::array<double, 3> weights{};
    std::array<int, 3> choice{};
    for (Turn t : {Turn::Left, Turn::Straight, Turn::Right}) {
      const int out = node.outgoing_links[index_of(exit_side(cur.side_at_to, t))];
      const int dest = net.link(out).to;
      choice[index_of(t)] = out;
      const bool open = dest == kBoundary || (!visited[dest] && can_escape(net, dest, visited));
      weights[index_of(t)] = open ? probs[index_of(t)] : 0.0;
    }
    if (weights[0] + weights[1] + weights[2] <= 0.0) {
      throw ValidationError("random route from " + net.link(entry).name + " has no unvisited exit");
    }
    std::discrete_distribution<int> pick(weights.begin(), weights.end());
    link = choice[pick(rng)];
    route.push_back(link);
  }
  return route;
}

}  // namespace

std::vector<ScheduledVehicle> synthetic_demand(const RoadNetwork& net, const DemandSpec& spec,
                                               std::uint64_t seed) {
  if (spec.vehicles_per_hour < 0.0) throw ValidationError("demand rate must be non-negative");
  spec.idm.validate();
  std::vector<ScheduledVehicle> out;
  if (spec.vehicles_per_hour == 0.0) return out;
  std::mt19937_64 rng(seed);
  const double rate = spec.vehicles_per_hour / 3600.0;
  for (int li = 0; li < static_cast<int>(net.links().size()); ++li) {
    if (net.link(li).from != kBoundary) continue;
    double t = 0.0;
    while (true) {
      std::exponential_distribution<double> gap(rate);
      t += gap(rng);
      if (t > spec.horizon) break;
      out.push_back({random_route(net, li, spec.turn_probs, rng), std::floor(t), spec.idm});
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ScheduledVehicle& a, const ScheduledVehicle& b) { return a.start_time < b.start_time; });
  return out;
}

}  // namespace tsc::traffic
