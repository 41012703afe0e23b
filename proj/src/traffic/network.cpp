#include "tsc/traffic/network.hpp"

#include <algorithm>
#include <string>

#include "tsc/error.hpp"

namespace tsc::traffic {
namespace {

constexpr GreenMask bit(Approach a, Turn t) { return static_cast<GreenMask>(1u << slot_of(a, t)); }

constexpr GreenMask both(Approach a, Approach b, Turn t) { return bit(a, t) | bit(b, t); }

constexpr GreenMask straight_and_left(Approach a) { return bit(a, Turn::Straight) | bit(a, Turn::Left); }

bool perpendicular(Approach a, Approach b) { return a != b && opposite(a) != b; }

}  // namespace

const std::array<Phase, kNumPhases>& standard_phases() {
  using A = Approach;
  using T = Turn;
  static const std::array<Phase, kNumPhases> phases = {{
      {0, "NS-Straight", static_cast<GreenMask>(both(A::North, A::South, T::Straight) | kRightTurnMask)},
      {1, "WE-Straight", static_cast<GreenMask>(both(A::West, A::East, T::Straight) | kRightTurnMask)},
      {2, "NS-Left", static_cast<GreenMask>(both(A::North, A::South, T::Left) | kRightTurnMask)},
      {3, "WE-Left", static_cast<GreenMask>(both(A::West, A::East, T::Left) | kRightTurnMask)},
      {4, "S-SL", static_cast<GreenMask>(straight_and_left(A::South) | kRightTurnMask)},
      {5, "W-SL", static_cast<GreenMask>(straight_and_left(A::West) | kRightTurnMask)},
      {6, "N-SL", static_cast<GreenMask>(straight_and_left(A::North) | kRightTurnMask)},
      {7, "E-SL", static_cast<GreenMask>(straight_and_left(A::East) | kRightTurnMask)},
  }};
  return phases;
}

bool slots_conflict(int slot_a, int slot_b) {
  const Approach a = approach_of_slot(slot_a);
  const Approach b = approach_of_slot(slot_b);
  const Turn ta = turn_of_slot(slot_a);
  const Turn tb = turn_of_slot(slot_b);
  if (ta == Turn::Right || tb == Turn::Right || a == b) return false;
  if (perpendicular(a, b)) return true;
  // Opposite approaches: only a left turn across the opposing through flow conflicts.
  return ta != tb;
}

bool conflict_free(GreenMask mask) {
  for (int i = 0; i < kLanesPerIntersection; ++i) {
    if (!(mask & (1u << i))) continue;
    for (int j = i + 1; j < kLanesPerIntersection; ++j) {
      if ((mask & (1u << j)) && slots_conflict(i, j)) return false;
    }
  }
  return true;
}

int RoadNetwork::link_index(const std::string& name) const {
  auto it = link_by_name_.find(name);
  return it == link_by_name_.end() ? -1 : it->second;
}

int RoadNetwork::intersection_index(const std::string& name) const {
  auto it = intersection_by_name_.find(name);
  return it == intersection_by_name_.end() ? -1 : it->second;
}

int RoadNetwork::lane_for(int link_id, int next_link) const {
  const Link& l = links_.at(link_id);
  const int straight = std::min<int>(1, static_cast<int>(l.lanes.size()) - 1);
  if (next_link == kBoundary || l.to == kBoundary) return l.lanes[straight];
  const auto turn = turn_between(l.side_at_to, links_.at(next_link).side_at_from);
  if (!turn) {
    throw ValidationError("no movement from link " + l.name + " to link " + links_.at(next_link).name);
  }
  return intersections_[l.to].incoming_lanes[slot_of(l.side_at_to, *turn)];
}

void RoadNetwork::validate_route(const std::vector<int>& route) const {
  if (route.empty()) throw ValidationError("route is empty");
  for (std::size_t k = 0; k < route.size(); ++k) {
    if (route[k] < 0 || route[k] >= static_cast<int>(links_.size())) {
      throw ValidationError("route references unknown link index " + std::to_string(route[k]));
    }
    if (k == 0) continue;
    const Link& prev = links_[route[k - 1]];
    const Link& next = links_[route[k]];
    if (prev.to == kBoundary || prev.to != next.from) {
      throw ValidationError("route links " + prev.name + " -> " + next.name + " are not connected");
    }
    if (!turn_between(prev.side_at_to, next.side_at_from)) {
      throw ValidationError("route makes a U-turn at link " + prev.name);
    }
  }
}

double RoadNetwork::max_speed_limit() const {
  double best = 0.0;
  for (const Lane& lane : lanes_) best = std::max(best, lane.speed_limit);
  return best;
}

int NetworkBuilder::add_intersection(std::string name, double x, double y) {
  const int id = static_cast<int>(net_.intersections_.size());
  if (!net_.intersection_by_name_.emplace(name, id).second) {
    throw ValidationError("duplicate intersection id " + name);
  }
  Intersection node;
  node.name = std::move(name);
  node.x = x;
  node.y = y;
  node.incoming_links.fill(-1);
  node.outgoing_links.fill(-1);
  node.neighbors.fill(kBoundary);
  net_.intersections_.push_back(std::move(node));
  return id;
}

int NetworkBuilder::add_link(std::string name, int from, int to, Approach side_at_from,
                             Approach side_at_to, double length, double speed_limit,
                             int num_lanes) {
  if (!(length > 0.0)) throw ValidationError("link " + name + ": length must be positive");
  if (!(speed_limit > 0.0)) throw ValidationError("link " + name + ": speed limit must be positive");
  if (num_lanes < 1) throw ValidationError("link " + name + ": needs at least one lane");
  const int n = static_cast<int>(net_.intersections_.size());
  if (from < kBoundary || from >= n || to < kBoundary || to >= n) {
    throw ValidationError("link " + name + ": unknown endpoint");
  }
  const int id = static_cast<int>(net_.links_.size());
  if (!net_.link_by_name_.emplace(name, id).second) {
    throw ValidationError("duplicate link id " + name);
  }
  Link link;
  link.name = std::move(name);
  link.from = from;
  link.to = to;
  link.length = length;
  link.speed_limit = speed_limit;
  link.side_at_from = side_at_from;
  link.side_at_to = side_at_to;
  for (int k = 0; k < num_lanes; ++k) {
    Lane lane;
    lane.id = static_cast<int>(net_.lanes_.size());
    lane.link = id;
    lane.index = k;
    lane.length = length;
    lane.speed_limit = speed_limit;
    link.lanes.push_back(lane.id);
    net_.lanes_.push_back(lane);
  }
  net_.links_.push_back(std::move(link));
  return id;
}

void NetworkBuilder::set_lane_speed(int link, int lane_index, double speed_limit) {
  if (!(speed_limit > 0.0)) throw ValidationError("lane speed limit must be positive");
  Link& l = net_.links_.at(link);
  net_.lanes_.at(l.lanes.at(lane_index)).speed_limit = speed_limit;
  l.speed_limit = 0.0;
  for (int lane : l.lanes) l.speed_limit = std::max(l.speed_limit, net_.lanes_[lane].speed_limit);
}

void NetworkBuilder::add_raw_phase(int intersection, RawLightPhase phase) {
  net_.intersections_.at(intersection).raw_phases.push_back(std::move(phase));
}

std::shared_ptr<const RoadNetwork> NetworkBuilder::build() {
  auto& nodes = net_.intersections_;
  auto& links = net_.links_;

  for (int li = 0; li < static_cast<int>(links.size()); ++li) {
    const Link& l = links[li];
    if (l.to != kBoundary) {
      Intersection& node = nodes[l.to];
      int& slot = node.incoming_links[index_of(l.side_at_to)];
      if (slot != -1) {
        throw ValidationError("intersection " + node.name + ": two incoming links on side " +
                              std::string(approach_name(l.side_at_to)) +
                              " (heterogeneous layout unsupported)");
      }
      slot = li;
    }
    if (l.from != kBoundary) {
      Intersection& node = nodes[l.from];
      int& slot = node.outgoing_links[index_of(l.side_at_from)];
      if (slot != -1) {
        throw ValidationError("intersection " + node.name + ": two outgoing links on side " +
                              std::string(approach_name(l.side_at_from)) +
                              " (heterogeneous layout unsupported)");
      }
      slot = li;
    }
  }

  for (int i = 0; i < static_cast<int>(nodes.size()); ++i) {
    Intersection& node = nodes[i];
    node.movements.clear();
    for (Approach side : kAllApproaches) {
      const int s = index_of(side);
      const int in = node.incoming_links[s];
      const int out = node.outgoing_links[s];
      if (in < 0 || out < 0) {
        throw ValidationError("intersection " + node.name + ": missing " +
                              (in < 0 ? std::string("incoming") : std::string("outgoing")) +
                              " link on side " + std::string(approach_name(side)) +
                              " (heterogeneous layout unsupported)");
      }
      if (links[in].lanes.size() != kLanesPerApproach || links[out].lanes.size() != kLanesPerApproach) {
        throw ValidationError("intersection " + node.name + ": links on side " +
                              std::string(approach_name(side)) +
                              " must have 3 lanes (heterogeneous layout unsupported)");
      }
      for (int k = 0; k < kLanesPerApproach; ++k) {
        node.incoming_lanes[s * kLanesPerApproach + k] = links[in].lanes[k];
        node.outgoing_lanes[s * kLanesPerApproach + k] = links[out].lanes[k];
      }
      const int upstream = links[in].from;
      const int downstream = links[out].to;
      if (upstream != downstream) {
        throw ValidationError("intersection " + node.name + ": side " + std::string(approach_name(side)) +
                              " connects to different intersections in and out (link " +
                              links[in].name + " vs " + links[out].name + ")");
      }
      node.neighbors[s] = downstream;
    }
    for (Approach side : kAllApproaches) {
      for (Turn turn : {Turn::Left, Turn::Straight, Turn::Right}) {
        const int in_lane = node.incoming_lanes[slot_of(side, turn)];
        const int out_link = node.outgoing_links[index_of(exit_side(side, turn))];
        for (int out_lane : links[out_link].lanes) {
          node.movements.push_back({in_lane, out_lane, side, turn});
        }
      }
    }
  }

  for (int i = 0; i < static_cast<int>(nodes.size()); ++i) {
    for (Approach side : kAllApproaches) {
      const int j = nodes[i].neighbor(side);
      if (j == kBoundary) continue;
      if (j == i || nodes[j].neighbor(opposite(side)) != i) {
        throw ValidationError("asymmetric topology: intersection " + nodes[i].name + " has " +
                              nodes[j].name + " on side " + std::string(approach_name(side)) +
                              " but not vice versa (link " +
                              links[nodes[i].outgoing_links[index_of(side)]].name + ")");
      }
    }
  }

  auto out = std::make_shared<const RoadNetwork>(std::move(net_));
  net_ = RoadNetwork{};
  return out;
}

}  // namespace tsc::traffic
