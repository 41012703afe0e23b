#include "tsc/napo/networks.hpp"

#include <string>

#include "tsc/error.hpp"

namespace tsc::napo {

using encoding::kBlocks;
using encoding::kNeighbors;

void NetworkConfig::validate() const {
  if (block_input_dim <= 0 || num_agents <= 0) throw ValidationError("network config: input dims must be positive");
  if (hidden <= 0 || heads <= 0 || hidden % heads != 0) {
    throw ValidationError("network config: heads must divide the hidden width (" + std::to_string(hidden) + ")");
  }
}

SequenceInput make_step_input(const std::vector<encoding::Observation>& obs) {
  if (obs.empty()) throw ShapeError("make_step_input: no observations");
  const long agents = static_cast<long>(obs.size());
  const long dim = obs[0].block_input_dim();
  SequenceInput in;
  in.agents = agents;
  in.blocks = Mat::Zero(agents * kBlocks, dim);
  in.mask = Mat::Zero(agents, kNeighbors);
  for (long i = 0; i < agents; ++i) {
    const auto& o = obs[i];
    if (o.block_input_dim() != dim) throw ShapeError("make_step_input: agents disagree on block width");
    for (int b = 0; b < kBlocks; ++b) {
      if (b > 0 && !o.mask[b - 1]) continue;
      const auto row = o.block_input(b);
      in.blocks.row(i * kBlocks + b) = Eigen::Map<const Eigen::RowVectorXd>(row.data(), dim);
    }
    for (int k = 0; k < kNeighbors; ++k) in.mask(i, k) = o.mask[k] ? 1.0 : 0.0;
  }
  return in;
}

void set_neighbor_actions(SequenceInput& input, const std::vector<encoding::Observation>& obs,
                          const std::vector<int>& actions) {
  const long agents = static_cast<long>(obs.size());
  if (input.rows() != agents || static_cast<long>(actions.size()) != agents) {
    throw ShapeError("set_neighbor_actions: one observation and action per agent expected");
  }
  input.neighbor_actions = Mat::Zero(agents * kNeighbors, kActionFeatureDim);
  for (long i = 0; i < agents; ++i) {
    for (int k = 0; k < kNeighbors; ++k) {
      if (!obs[i].mask[k]) continue;
      const int a = actions.at(obs[i].neighbor_ids[k]);
      if (a < 0 || a >= traffic::kNumPhases) throw ValidationError("neighbor action out of range");
      auto row = input.neighbor_actions.row(i * kNeighbors + k);
      row(a) = 1.0;
      row(traffic::kNumPhases + k) = 1.0;
      row(kActionFeatureDim - 1) = 1.0;
    }
  }
}

SequenceInput concat_steps(const std::vector<SequenceInput>& steps) {
  if (steps.empty()) throw ShapeError("concat_steps: nothing to stack");
  SequenceInput out;
  out.agents = steps[0].agents;
  long rows = 0;
  const bool with_actions = steps[0].neighbor_actions.size() != 0;
  for (const auto& s : steps) {
    if (s.agents != out.agents || (s.neighbor_actions.size() != 0) != with_actions) {
      throw ShapeError("concat_steps: inconsistent steps");
    }
    rows += s.rows();
  }
  out.blocks.resize(rows * kBlocks, steps[0].blocks.cols());
  out.mask.resize(rows, kNeighbors);
  if (with_actions) out.neighbor_actions.resize(rows * kNeighbors, kActionFeatureDim);
  long at = 0;
  for (const auto& s : steps) {
    out.blocks.middleRows(at * kBlocks, s.rows() * kBlocks) = s.blocks;
    out.mask.middleRows(at, s.rows()) = s.mask;
    if (with_actions) out.neighbor_actions.middleRows(at * kNeighbors, s.rows() * kNeighbors) = s.neighbor_actions;
    at += s.rows();
  }
  return out;
}

namespace {

void check_input(const SequenceInput& in, const NetworkConfig& cfg) {
  if (in.agents <= 0 || in.rows() % in.agents != 0 || in.rows() == 0) {
    throw ShapeError("sequence input: rows must be a positive multiple of the agent count");
  }
  if (in.blocks.rows() != in.rows() * kBlocks || in.blocks.cols() != cfg.block_input_dim) {
    throw ShapeError("sequence input: expected " + std::to_string(in.rows() * kBlocks) + " x " +
                     std::to_string(cfg.block_input_dim) + " blocks, got " + std::to_string(in.blocks.rows()) + " x " +
                     std::to_string(in.blocks.cols()));
  }
}

void check_hidden(const Tensor& h0, const SequenceInput& in, const NetworkConfig& cfg) {
  if (h0.rows() != in.agents || h0.cols() != cfg.hidden) throw ShapeError("hidden state must be agents x hidden");
}

// Runs the recurrence over the time-major rows and returns the stacked
// hidden states (rows x hidden) and the last one.
std::pair<Tensor, Tensor> run_gru(const nn::GRUCell& gru, const Tensor& x, const Tensor& h0, long agents) {
  const Tensor gates = gru.input_gates(x);
  const long steps = x.rows() / agents;
  std::vector<Tensor> hs;
  hs.reserve(static_cast<std::size_t>(steps));
  Tensor h = h0;
  for (long t = 0; t < steps; ++t) {
    h = gru.step(nn::slice_rows(gates, t * agents, agents), h);
    hs.push_back(h);
  }
  return {steps == 1 ? h : nn::concat_rows(hs), h};
}

std::vector<long> block_rows(long rows, bool ego) {
  std::vector<long> idx;
  idx.reserve(static_cast<std::size_t>(rows * (ego ? 1 : kNeighbors)));
  for (long r = 0; r < rows; ++r) {
    if (ego) {
      idx.push_back(r * kBlocks);
    } else {
      for (int k = 1; k < kBlocks; ++k) idx.push_back(r * kBlocks + k);
    }
  }
  return idx;
}

}  // namespace

SpatialEncoder::SpatialEncoder(nn::ParameterSet& ps, const std::string& prefix, const NetworkConfig& cfg,
                               std::mt19937_64& rng)
    : heads_(cfg.heads),
      embed_(ps, prefix + ".embed", cfg.block_input_dim, cfg.hidden, rng),
      norm_(ps, prefix + ".norm", cfg.hidden),
      query_(ps, prefix + ".query", cfg.hidden, cfg.hidden, rng, false),
      key_(ps, prefix + ".key", cfg.hidden, cfg.hidden, rng, false),
      value_(ps, prefix + ".value", cfg.hidden, cfg.hidden, rng, false) {}

Tensor SpatialEncoder::operator()(const SequenceInput& in, Mat* weights) const {
  const Tensor features = norm_(nn::relu(embed_(Tensor::constant(in.blocks))));
  const Tensor ego = nn::gather_rows(features, block_rows(in.rows(), true));
  const Tensor others = nn::gather_rows(features, block_rows(in.rows(), false));
  auto att = nn::multi_head_attention(query_(ego), key_(others), value_(others), in.mask, heads_);
  if (weights) *weights = std::move(att.weights);
  return nn::add(ego, att.out);
}

ActorNetwork::ActorNetwork(const NetworkConfig& cfg, std::mt19937_64& rng) : cfg_(cfg) {
  cfg_.validate();
  encoder_ = SpatialEncoder(params_, "actor.spatial", cfg_, rng);
  gru_ = nn::GRUCell(params_, "actor.gru", cfg_.hidden, cfg_.hidden, rng);
  policy_head_ = nn::Linear(params_, "actor.policy", cfg_.hidden, cfg_.num_phases, rng);
  queue_head_ = nn::Linear(params_, "actor.queue", cfg_.hidden, cfg_.queue_dim, rng);
}

Tensor ActorNetwork::initial_hidden(long agents) const { return Tensor::constant(Mat::Zero(agents, cfg_.hidden)); }

ActorOutput ActorNetwork::forward(const SequenceInput& in, const Tensor& h0) const {
  check_input(in, cfg_);
  check_hidden(h0, in, cfg_);
  ActorOutput out;
  const Tensor aggregated = encoder_(in, &out.alpha);
  auto [hs, last] = run_gru(gru_, aggregated, h0, in.agents);
  out.log_probs = nn::log_softmax_rows(policy_head_(hs));
  out.queue_pred = queue_head_(hs);
  out.hidden = last;
  return out;
}

CriticNetwork::CriticNetwork(const NetworkConfig& cfg, std::mt19937_64& rng) : cfg_(cfg) {
  cfg_.validate();
  encoder_ = SpatialEncoder(params_, "critic.spatial", cfg_, rng);
  action_embed_ = nn::Linear(params_, "critic.action_embed", kActionFeatureDim, cfg_.hidden, rng);
  query_norm_ = nn::LayerNorm(params_, "critic.query_norm", cfg_.hidden);
  query_ = nn::Linear(params_, "critic.query", cfg_.hidden, cfg_.hidden, rng, false);
  key_ = nn::Linear(params_, "critic.key", cfg_.hidden, cfg_.hidden, rng, false);
  value_ = nn::Linear(params_, "critic.value", cfg_.hidden, cfg_.hidden, rng, false);
  gru_ = nn::GRUCell(params_, "critic.gru", cfg_.hidden, cfg_.hidden, rng);
  value_head_ = nn::Linear(params_, "critic.value_head", cfg_.hidden, 1, rng);
  queue_head_ = nn::Linear(params_, "critic.queue", cfg_.hidden, cfg_.queue_dim, rng);
}

Tensor CriticNetwork::initial_hidden(long agents) const { return Tensor::constant(Mat::Zero(agents, cfg_.hidden)); }

CriticOutput CriticNetwork::forward(const SequenceInput& in, const Tensor& h0) const {
  check_input(in, cfg_);
  check_hidden(h0, in, cfg_);
  if (in.neighbor_actions.rows() != in.rows() * kNeighbors || in.neighbor_actions.cols() != kActionFeatureDim) {
    throw ShapeError("critic input: neighbor action blocks missing or misshaped");
  }
  CriticOutput out;
  const Tensor encoded = encoder_(in, &out.state_alpha);
  const Tensor actions = nn::relu(action_embed_(Tensor::constant(in.neighbor_actions)));
  auto att = nn::multi_head_attention(query_(query_norm_(encoded)), key_(actions), value_(actions), in.mask,
                                      cfg_.heads);
  out.beta = std::move(att.weights);
  auto [hs, last] = run_gru(gru_, nn::add(encoded, att.out), h0, in.agents);
  out.value = value_head_(hs);
  out.queue_pred = queue_head_(hs);
  out.hidden = last;
  return out;
}

}  // namespace tsc::napo
