#pragma once

#include <memory>
#include <random>
#include <vector>

#include "scenarios.hpp"
#include "tsc/encoding/env.hpp"
#include "tsc/napo/networks.hpp"
#include "tsc/traffic/demand.hpp"

namespace tsc::testing {

// Environment on a rows x cols grid advanced `steps` decisions with random
// phases, so observations carry real traffic.
struct LiveEnv {
  std::shared_ptr<const traffic::RoadNetwork> net;
  std::unique_ptr<encoding::Environment> env;
};

inline LiveEnv live_env(int rows, int cols, int steps, std::uint64_t seed = 5,
                        encoding::StateKind kind = encoding::StateKind::QDSE) {
  LiveEnv le;
  le.net = make_grid(rows, cols);
  encoding::EnvConfig cfg;
  cfg.kind = kind;
  le.env = std::make_unique<encoding::Environment>(le.net, cfg);
  traffic::DemandSpec ds;
  ds.vehicles_per_hour = 600;
  le.env->reset(traffic::synthetic_demand(*le.net, ds, seed), seed);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> phase(0, traffic::kNumPhases - 1);
  for (int s = 0; s < steps; ++s) {
    std::vector<int> a(le.env->num_agents());
    for (int& x : a) x = phase(rng);
    le.env->step(a);
  }
  return le;
}

inline napo::NetworkConfig small_config(const encoding::Environment& env, int hidden = 16, int heads = 4) {
  napo::NetworkConfig c;
  c.num_agents = env.num_agents();
  c.block_input_dim = env.observations()[0].block_input_dim();
  c.hidden = hidden;
  c.heads = heads;
  return c;
}

inline std::vector<int> random_actions(int n, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> phase(0, traffic::kNumPhases - 1);
  std::vector<int> a(n);
  for (int& x : a) x = phase(rng);
  return a;
}

}  // namespace tsc::testing
