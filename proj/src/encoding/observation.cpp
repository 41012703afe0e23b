#include "tsc/encoding/observation.hpp"

#include <string>

#include "tsc/error.hpp"

namespace tsc::encoding {

std::vector<double> Observation::block_input(int b) const {
  if (b < 0 || b >= kBlocks) throw ShapeError("observation block index out of range");
  std::vector<double> out(block_input_dim(), 0.0);
  if (b > 0 && !mask[b - 1]) return out;
  const std::vector<double>& state = b == 0 ? ego : neighbors[b - 1];
  std::copy(state.begin(), state.end(), out.begin());
  const int id = b == 0 ? agent : neighbor_ids[b - 1];
  out[state_dim() + id] = 1.0;
  out[state_dim() + num_agents + b] = 1.0;
  return out;
}

std::vector<double> Observation::flatten() const {
  std::vector<double> out(ego);
  for (const auto& block : neighbors) out.insert(out.end(), block.begin(), block.end());
  for (bool m : mask) out.push_back(m ? 1.0 : 0.0);
  for (int a = 0; a < num_agents; ++a) out.push_back(a == agent ? 1.0 : 0.0);
  out.push_back(static_cast<double>(step));
  return out;
}

Observation assemble_observation(int agent, const std::vector<std::vector<double>>& states,
                                 const traffic::RoadNetwork& net, int step) {
  if (agent < 0 || agent >= net.num_intersections() || agent >= static_cast<int>(states.size())) {
    throw ValidationError("assemble_observation: unknown agent id " + std::to_string(agent));
  }
  Observation obs;
  obs.agent = agent;
  obs.num_agents = net.num_intersections();
  obs.step = step;
  obs.ego = states[agent];
  const auto& node = net.intersection(agent);
  for (int k = 0; k < kNeighbors; ++k) {
    const int j = node.neighbors[k];
    obs.neighbor_ids[k] = j;
    obs.mask[k] = j != traffic::kBoundary;
    obs.neighbors[k] = obs.mask[k] ? states.at(j) : std::vector<double>(obs.ego.size(), 0.0);
  }
  return obs;
}

}  // namespace tsc::encoding
