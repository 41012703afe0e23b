#pragma once

#include <iosfwd>
#include <memory>
#include <string>

#include "tsc/traffic/idm.hpp"
#include "tsc/traffic/network.hpp"

namespace tsc::traffic {

/// Native rows x cols grid description. Row 0 is the northern row.
struct GridSpec {
  int rows = 1;
  int cols = 1;
  double link_length = 300.0;  // m, also used for boundary entry/exit links
  double speed_limit = 11.111;  // m/s
  double phase_duration = 5.0;  // s
  double yellow_duration = 2.0;  // s
  IdmParams idm{};
};

/// Parses the `key = value` text format (`#` starts a comment). Unknown keys
/// are rejected; missing keys keep their defaults.
GridSpec parse_grid_spec(std::istream& in);
GridSpec load_grid_spec(const std::string& path);
std::string format_grid_spec(const GridSpec& spec);

/// Builds the grid network. Intersections are named `intersection_<r>_<c>`;
/// links `road_<r>_<c>_<side>` for the link leaving (r,c) through `side`, and
/// `entry_<r>_<c>_<side>` for boundary links arriving on `side`.
std::shared_ptr<const RoadNetwork> load_network(const GridSpec& spec);

}  // namespace tsc::traffic
