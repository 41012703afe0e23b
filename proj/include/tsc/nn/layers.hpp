#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "tsc/nn/ops.hpp"

namespace tsc::nn {

/// Named trainable tensors in registration order.
class ParameterSet {
 public:
  Tensor add(std::string name, Mat init);
  const std::vector<std::pair<std::string, Tensor>>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  long total_elements() const;

  void zero_grad();
  /// Parameters with no gradient yet count as zero.
  double grad_norm() const;
  /// Rescales all gradients so their joint L2 norm is at most `max_norm`.
  /// Returns the norm before clipping.
  double clip_grad_norm(double max_norm);

  std::vector<double> flat_values() const;
  void set_flat_values(const std::vector<double>& flat);
  std::vector<double> flat_grads() const;

 private:
  std::vector<std::pair<std::string, Tensor>> entries_;
};

/// U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
Mat uniform_fan_in(long fan_in, long rows, long cols, std::mt19937_64& rng);

class Linear {
 public:
  Linear() = default;
  Linear(ParameterSet& params, const std::string& name, long in, long out, std::mt19937_64& rng, bool bias = true);
  Tensor operator()(const Tensor& x) const;
  long in() const { return weight_.rows(); }
  long out() const { return weight_.cols(); }

 private:
  Tensor weight_;  // in x out
  Tensor bias_;    // 1 x out, undefined when disabled
};

class LayerNorm {
 public:
  LayerNorm() = default;
  LayerNorm(ParameterSet& params, const std::string& name, long dim);
  Tensor operator()(const Tensor& x) const;

 private:
  Tensor gain_;
  Tensor bias_;
};

/// h' = (1 - z) * n + z * h with update gate z, reset gate r and candidate n.
class GRUCell {
 public:
  GRUCell() = default;
  GRUCell(ParameterSet& params, const std::string& name, long in, long hidden, std::mt19937_64& rng);
  Tensor operator()(const Tensor& x, const Tensor& h) const;
  /// Input-side gate pre-activations, computable for many steps at once.
  Tensor input_gates(const Tensor& x) const;
  /// Recurrence given precomputed input gates for the rows of `h`.
  Tensor step(const Tensor& input_gates, const Tensor& h) const;
  long hidden() const { return hidden_; }

 private:
  long hidden_ = 0;
  Tensor w_input_;   // in x 3h, gate order r | z | n
  Tensor w_hidden_;  // h x 3h
  Tensor b_input_;   // 1 x 3h
  Tensor b_hidden_;  // 1 x 3h
};

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<Mat> m;
  std::vector<Mat> v;
  std::int64_t step = 0;
};

/// Bias-corrected Adam over a ParameterSet. Throws TrainingFault, leaving
/// parameters and moments untouched, when any gradient is non-finite.
class Adam {
 public:
  Adam(const ParameterSet& params, AdamConfig config);
  void step(ParameterSet& params);

  const AdamConfig& config() const { return config_; }
  AdamState& state() { return state_; }
  const AdamState& state() const { return state_; }

 private:
  AdamConfig config_;
  AdamState state_;
};

}  // namespace tsc::nn
