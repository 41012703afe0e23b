#pragma once

#include <array>
#include <vector>

#include "tsc/traffic/network.hpp"

namespace tsc::encoding {

inline constexpr int kNeighbors = 4;
inline constexpr int kBlocks = 1 + kNeighbors;  // ego then N, S, E, W

/// Per-agent view: its own state and its neighbors' states in N/S/E/W order.
struct Observation {
  int agent = 0;
  int num_agents = 1;
  int step = 0;
  std::vector<double> ego;
  std::array<std::vector<double>, kNeighbors> neighbors;  // zero blocks when absent
  std::array<bool, kNeighbors> mask{};
  std::array<int, kNeighbors> neighbor_ids{-1, -1, -1, -1};

  int state_dim() const { return static_cast<int>(ego.size()); }

  /// Network input of block b (0 = ego): [state | agent one-hot | block one-hot].
  /// Absent neighbor blocks are all zero.
  std::vector<double> block_input(int b) const;
  int block_input_dim() const { return state_dim() + num_agents + kBlocks; }

  /// [ego | N | S | E | W | mask | agent one-hot | step].
  std::vector<double> flatten() const;
};

Observation assemble_observation(int agent, const std::vector<std::vector<double>>& states,
                                 const traffic::RoadNetwork& net, int step = 0);

}  // namespace tsc::encoding
