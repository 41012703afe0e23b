#pragma once

#include <random>
#include <vector>

#include "tsc/encoding/observation.hpp"
#include "tsc/nn/layers.hpp"
#include "tsc/traffic/types.hpp"

namespace tsc::napo {

using nn::Mat;
using nn::Tensor;

/// Neighbor action block: [phase one-hot | neighbor slot one-hot | present].
inline constexpr int kActionFeatureDim = traffic::kNumPhases + encoding::kNeighbors + 1;

struct NetworkConfig {
  int block_input_dim = 0;  // Observation::block_input_dim()
  int num_agents = 1;
  int hidden = 128;
  int heads = 8;
  int num_phases = traffic::kNumPhases;
  int queue_dim = traffic::kTrackedLanes;

  void validate() const;
};

/// Network inputs for `steps` consecutive decisions of `agents` agents, time
/// major: row r = t * agents + i.
struct SequenceInput {
  long agents = 0;
  Mat blocks;             // rows*5 x block_input_dim; absent neighbors zeroed
  Mat mask;               // rows x 4, 1 where the neighbor exists
  Mat neighbor_actions;   // rows*4 x kActionFeatureDim, critic only

  long rows() const { return mask.rows(); }
  long steps() const { return agents ? rows() / agents : 0; }
};

/// One decision step of all agents (observations indexed by agent).
SequenceInput make_step_input(const std::vector<encoding::Observation>& obs);
/// Adds the neighbor action blocks for `actions` (indexed by agent). The
/// ego agent's own action is never read.
void set_neighbor_actions(SequenceInput& input, const std::vector<encoding::Observation>& obs,
                          const std::vector<int>& actions);
/// Stacks per-step inputs in time order.
SequenceInput concat_steps(const std::vector<SequenceInput>& steps);

struct ActorOutput {
  Tensor log_probs;   // rows x phases
  Tensor queue_pred;  // rows x queue_dim
  Tensor hidden;      // agents x hidden, after the last step
  Mat alpha;          // rows x (heads*4) spatial attention weights
};

struct CriticOutput {
  Tensor value;       // rows x 1
  Tensor queue_pred;  // rows x queue_dim
  Tensor hidden;      // agents x hidden
  Mat state_alpha;    // rows x (heads*4) neighbor-state attention
  Mat beta;           // rows x (heads*4) neighbor-action attention
};

/// Embedding, layer norm and masked attention of the ego block over the
/// neighbor blocks, plus the ego residual.
class SpatialEncoder {
 public:
  SpatialEncoder() = default;
  SpatialEncoder(nn::ParameterSet& ps, const std::string& prefix, const NetworkConfig& cfg, std::mt19937_64& rng);
  Tensor operator()(const SequenceInput& in, Mat* weights) const;

 private:
  int heads_ = 8;
  nn::Linear embed_;
  nn::LayerNorm norm_;
  nn::Linear query_, key_, value_;
};

class ActorNetwork {
 public:
  ActorNetwork(const NetworkConfig& cfg, std::mt19937_64& rng);
  ActorNetwork(const ActorNetwork&) = delete;
  ActorNetwork& operator=(const ActorNetwork&) = delete;

  ActorOutput forward(const SequenceInput& in, const Tensor& h0) const;
  Tensor initial_hidden(long agents) const;

  nn::ParameterSet& params() { return params_; }
  const nn::ParameterSet& params() const { return params_; }
  const NetworkConfig& config() const { return cfg_; }

 private:
  NetworkConfig cfg_;
  nn::ParameterSet params_;
  SpatialEncoder encoder_;
  nn::GRUCell gru_;
  nn::Linear policy_head_;
  nn::Linear queue_head_;
};

class CriticNetwork {
 public:
  CriticNetwork(const NetworkConfig& cfg, std::mt19937_64& rng);
  CriticNetwork(const CriticNetwork&) = delete;
  CriticNetwork& operator=(const CriticNetwork&) = delete;

  /// Requires in.neighbor_actions.
  CriticOutput forward(const SequenceInput& in, const Tensor& h0) const;
  Tensor initial_hidden(long agents) const;

  nn::ParameterSet& params() { return params_; }
  const nn::ParameterSet& params() const { return params_; }
  const NetworkConfig& config() const { return cfg_; }

 private:
  NetworkConfig cfg_;
  nn::ParameterSet params_;
  SpatialEncoder encoder_;
  nn::Linear action_embed_;
  nn::LayerNorm query_norm_;
  nn::Linear query_, key_, value_;
  nn::GRUCell gru_;
  nn::Linear value_head_;
  nn::Linear queue_head_;
};

}  // namespace tsc::napo
