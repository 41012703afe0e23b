#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "tsc/traffic/types.hpp"

namespace tsc::traffic {

inline constexpr int kBoundary = -1;

struct Lane {
  int id = 0;
  int link = 0;
  int index = 0;  // position within the link, 0 = innermost
  double length = 0.0;
  double speed_limit = 0.0;
};

/// Directed road. `from`/`to` are intersection indices or kBoundary when the
/// road enters from / leaves to the outside of the network.
struct Link {
  std::string name;
  int from = kBoundary;
  int to = kBoundary;
  double length = 0.0;
  double speed_limit = 0.0;
  std::vector<int> lanes;
  Approach side_at_from = Approach::North;  // side of `from` the link leaves through
  Approach side_at_to = Approach::North;    // side of `to` the link arrives on
};

struct Movement {
  int in_lane = 0;
  int out_lane = 0;
  Approach approach = Approach::North;
  Turn turn = Turn::Straight;
};

/// Set of green incoming-lane slots (bit i = slot i).
using GreenMask = std::uint16_t;

inline constexpr GreenMask kRightTurnMask = (1u << slot_of(Approach::North, Turn::Right)) |
                                            (1u << slot_of(Approach::South, Turn::Right)) |
                                            (1u << slot_of(Approach::East, Turn::Right)) |
                                            (1u << slot_of(Approach::West, Turn::Right));

struct Phase {
  int id = 0;
  std::string_view name;
  GreenMask green = 0;  // includes the always-green right turns
};

/// The eight conflict-free phases: NS-Straight, WE-Straight, NS-Left, WE-Left,
/// S-SL, W-SL, N-SL, E-SL.
const std::array<Phase, kNumPhases>& standard_phases();

/// True when two incoming-lane slots may not be green at the same time.
/// Right turns never conflict.
bool slots_conflict(int slot_a, int slot_b);

/// True when no two green slots in `mask` conflict.
bool conflict_free(GreenMask mask);

/// Signal phase as it appears in an imported dataset, kept for round-tripping.
struct RawLightPhase {
  double time = 0.0;
  std::vector<int> available_road_links;
  int canonical = kNoPhase;  // matching standard phase id, if any
};

struct Intersection {
  std::string name;
  double x = 0.0;
  double y = 0.0;
  std::array<int, kLanesPerIntersection> incoming_lanes{};  // slot = approach*3 + turn
  std::array<int, kLanesPerIntersection> outgoing_lanes{};  // exit side*3 + lane index
  std::array<int, kApproaches> incoming_links{};
  std::array<int, kApproaches> outgoing_links{};
  std::array<int, kApproaches> neighbors{};  // kBoundary when absent
  std::vector<Movement> movements;
  std::vector<RawLightPhase> raw_phases;

  int neighbor(Approach side) const { return neighbors[index_of(side)]; }
};

/// Immutable road graph. Build with NetworkBuilder or the grid/CityFlow loaders.
class RoadNetwork {
 public:
  const std::vector<Intersection>& intersections() const { return intersections_; }
  const std::vector<Link>& links() const { return links_; }
  const std::vector<Lane>& lanes() const { return lanes_; }

  const Intersection& intersection(int i) const { return intersections_.at(i); }
  const Link& link(int i) const { return links_.at(i); }
  const Lane& lane(int i) const { return lanes_.at(i); }
  int num_intersections() const { return static_cast<int>(intersections_.size()); }

  int link_index(const std::string& name) const;  // -1 when unknown
  int intersection_index(const std::string& name) const;

  /// Lane of `link` a vehicle should occupy when its following link is
  /// `next_link` (kBoundary when the route ends on `link`).
  int lane_for(int link, int next_link) const;

  /// Checks a route is a connected chain of known links; throws ValidationError.
  void validate_route(const std::vector<int>& route) const;

  /// Max speed limit over all lanes.
  double max_speed_limit() const;

  friend class NetworkBuilder;

 private:
  std::vector<Intersection> intersections_;
  std::vector<Link> links_;
  std::vector<Lane> lanes_;
  std::unordered_map<std::string, int> link_by_name_;
  std::unordered_map<std::string, int> intersection_by_name_;
};

/// Incrementally assembles a RoadNetwork and validates the four-way layout,
/// neighbor symmetry and movement wiring on `build()`.
class NetworkBuilder {
 public:
  int add_intersection(std::string name, double x, double y);
  /// Adds a link with `num_lanes` lanes. Sides are ignored for boundary ends.
  int add_link(std::string name, int from, int to, Approach side_at_from, Approach side_at_to,
               double length, double speed_limit, int num_lanes = kLanesPerApproach);
  void set_lane_speed(int link, int lane_index, double speed_limit);
  void add_raw_phase(int intersection, RawLightPhase phase);

  std::shared_ptr<const RoadNetwork> build();

 private:
  RoadNetwork net_;
};

}  // namespace tsc::traffic
