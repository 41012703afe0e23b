#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace tsc::traffic {

// Sides of a four-way intersection. The order is also the neighbor-block
// order used by observations (N, S, E, W).
enum class Approach : std::uint8_t { North = 0, South = 1, East = 2, West = 3 };

// Lane index within an approach: 0 serves left turns, 1 straight, 2 right.
enum class Turn : std::uint8_t { Left = 0, Straight = 1, Right = 2 };

inline constexpr int kApproaches = 4;
inline constexpr int kLanesPerApproach = 3;
inline constexpr int kLanesPerIntersection = kApproaches * kLanesPerApproach;
inline constexpr int kTrackedLanes = 2 * kLanesPerIntersection;
inline constexpr int kNumPhases = 8;
inline constexpr int kNoPhase = -1;

inline constexpr std::array<Approach, 4> kAllApproaches = {
    Approach::North, Approach::South, Approach::East, Approach::West};

constexpr int index_of(Approach a) { return static_cast<int>(a); }
constexpr int index_of(Turn t) { return static_cast<int>(t); }

/// Incoming-lane slot used throughout: approach * 3 + turn.
constexpr int slot_of(Approach a, Turn t) { return index_of(a) * kLanesPerApproach + index_of(t); }
constexpr Approach approach_of_slot(int slot) { return static_cast<Approach>(slot / kLanesPerApproach); }
constexpr Turn turn_of_slot(int slot) { return static_cast<Turn>(slot % kLanesPerApproach); }

constexpr Approach opposite(Approach a) {
  switch (a) {
    case Approach::North: return Approach::South;
    case Approach::South: return Approach::North;
    case Approach::East: return Approach::West;
    case Approach::West: return Approach::East;
  }
  return a;
}

/// Side through which a vehicle arriving from `from` leaves when it makes `turn`.
constexpr Approach exit_side(Approach from, Turn turn) {
  switch (turn) {
    case Turn::Straight: return opposite(from);
    case Turn::Left:
      switch (from) {
        case Approach::North: return Approach::East;
        case Approach::South: return Approach::West;
        case Approach::East: return Approach::South;
        case Approach::West: return Approach::North;
      }
      break;
    case Turn::Right:
      switch (from) {
        case Approach::North: return Approach::West;
        case Approach::South: return Approach::East;
        case Approach::East: return Approach::North;
        case Approach::West: return Approach::South;
      }
      break;
  }
  return from;
}

/// Turn connecting an arrival side to an exit side; empty for U-turns.
constexpr std::optional<Turn> turn_between(Approach from, Approach to) {
  for (Turn t : {Turn::Left, Turn::Straight, Turn::Right}) {
    if (exit_side(from, t) == to) return t;
  }
  return std::nullopt;
}

constexpr std::string_view approach_name(Approach a) {
  switch (a) {
    case Approach::North: return "N";
    case Approach::South: return "S";
    case Approach::East: return "E";
    case Approach::West: return "W";
  }
  return "?";
}

}  // namespace tsc::traffic
