#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "tsc/traffic/network.hpp"
#include "tsc/traffic/simulation.hpp"

namespace tsc::traffic {

struct DemandSpec {
  double vehicles_per_hour = 300.0;  // per boundary entry link
  double horizon = 3600.0;           // last possible start time, s
  std::array<double, 3> turn_probs{0.2, 0.6, 0.2};  // left, straight, right
  IdmParams idm{};
};

/// Poisson arrivals on every boundary entry link with random-walk routes
/// that never revisit an intersection. Deterministic in `seed`.
std::vector<ScheduledVehicle> synthetic_demand(const RoadNetwork& net, const DemandSpec& spec,
                                               std::uint64_t seed);

}  // namespace tsc::traffic
