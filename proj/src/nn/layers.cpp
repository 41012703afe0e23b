#include "tsc/nn/layers.hpp"

#include <cmath>

#include "tsc/error.hpp"

namespace tsc::nn {

Tensor ParameterSet::add(std::string name, Mat init) {
  for (const auto& [existing, _] : entries_) {
    if (existing == name) throw ValidationError("duplicate parameter name '" + name + "'");
  }
  Tensor t = Tensor::parameter(std::move(init));
  entries_.emplace_back(std::move(name), t);
  return t;
}

long ParameterSet::total_elements() const {
  long n = 0;
  for (const auto& [_, t] : entries_) n += t.value().size();
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& [_, t] : entries_) t.zero_grad();
}

double ParameterSet::grad_norm() const {
  double sq = 0.0;
  for (const auto& [_, t] : entries_) {
    if (t.grad().size() != 0) sq += t.grad().squaredNorm();
  }
  return std::sqrt(sq);
}

double ParameterSet::clip_grad_norm(double max_norm) {
  const double norm = grad_norm();
  if (std::isfinite(norm) && norm > max_norm) {
    const double s = max_norm / norm;
    for (auto& [_, t] : entries_) {
      if (t.grad().size() != 0) t.node()->grad *= s;
    }
  }
  return norm;
}

std::vector<double> ParameterSet::flat_values() const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(total_elements()));
  for (const auto& [_, t] : entries_) out.insert(out.end(), t.value().data(), t.value().data() + t.value().size());
  return out;
}

void ParameterSet::set_flat_values(const std::vector<double>& flat) {
  if (static_cast<long>(flat.size()) != total_elements()) {
    throw ShapeError("parameter vector has " + std::to_string(flat.size()) + " values, expected " +
                     std::to_string(total_elements()));
  }
  std::size_t at = 0;
  for (auto& [_, t] : entries_) {
    Mat& v = t.node()->value;
    std::copy(flat.begin() + static_cast<long>(at), flat.begin() + static_cast<long>(at + v.size()), v.data());
    at += static_cast<std::size_t>(v.size());
  }
}

std::vector<double> ParameterSet::flat_grads() const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(total_elements()));
  for (const auto& [_, t] : entries_) {
    if (t.grad().size() == 0) {
      out.insert(out.end(), static_cast<std::size_t>(t.value().size()), 0.0);
    } else {
      out.insert(out.end(), t.grad().data(), t.grad().data() + t.grad().size());
    }
  }
  return out;
}

Mat uniform_fan_in(long fan_in, long rows, long cols, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Mat m(rows, cols);
  for (long i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

Linear::Linear(ParameterSet& params, const std::string& name, long in, long out, std::mt19937_64& rng, bool bias) {
  weight_ = params.add(name + ".weight", uniform_fan_in(in, in, out, rng));
  if (bias) bias_ = params.add(name + ".bias", uniform_fan_in(in, 1, out, rng));
}

Tensor Linear::operator()(const Tensor& x) const {
  Tensor y = matmul(x, weight_);
  return bias_.defined() ? add(y, bias_) : y;
}

LayerNorm::LayerNorm(ParameterSet& params, const std::string& name, long dim) {
  gain_ = params.add(name + ".gain", Mat::Ones(1, dim));
  bias_ = params.add(name + ".bias", Mat::Zero(1, dim));
}

Tensor LayerNorm::operator()(const Tensor& x) const { return layer_norm(x, gain_, bias_); }

GRUCell::GRUCell(ParameterSet& params, const std::string& name, long in, long hidden, std::mt19937_64& rng)
    : hidden_(hidden) {
  w_input_ = params.add(name + ".w_input", uniform_fan_in(hidden, in, 3 * hidden, rng));
  w_hidden_ = params.add(name + ".w_hidden", uniform_fan_in(hidden, hidden, 3 * hidden, rng));
  b_input_ = params.add(name + ".b_input", uniform_fan_in(hidden, 1, 3 * hidden, rng));
  b_hidden_ = params.add(name + ".b_hidden", uniform_fan_in(hidden, 1, 3 * hidden, rng));
}

Tensor GRUCell::operator()(const Tensor& x, const Tensor& h) const { return step(input_gates(x), h); }

Tensor GRUCell::input_gates(const Tensor& x) const { return add(matmul(x, w_input_), b_input_); }

Tensor GRUCell::step(const Tensor& gx, const Tensor& h) const {
  if (h.cols() != hidden_ || h.rows() != gx.rows() || gx.cols() != 3 * hidden_) {
    throw ShapeError("GRUCell: hidden state shape mismatch");
  }
  Tensor gh = add(matmul(h, w_hidden_), b_hidden_);
  Tensor r = sigmoid(add(slice_cols(gx, 0, hidden_), slice_cols(gh, 0, hidden_)));
  Tensor z = sigmoid(add(slice_cols(gx, hidden_, hidden_), slice_cols(gh, hidden_, hidden_)));
  Tensor n = tanh(add(slice_cols(gx, 2 * hidden_, hidden_), mul(r, slice_cols(gh, 2 * hidden_, hidden_))));
  return add(mul(one_minus(z), n), mul(z, h));
}

Adam::Adam(const ParameterSet& params, AdamConfig config) : config_(config) {
  for (const auto& [_, t] : params.entries()) {
    state_.m.push_back(Mat::Zero(t.rows(), t.cols()));
    state_.v.push_back(Mat::Zero(t.rows(), t.cols()));
  }
}

void Adam::step(ParameterSet& params) {
  const auto& entries = params.entries();
  if (entries.size() != state_.m.size()) throw ShapeError("Adam: parameter count changed");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const Tensor& t = entries[i].second;
    if (state_.m[i].rows() != t.rows() || state_.m[i].cols() != t.cols()) {
      throw ShapeError("Adam: moment shape mismatch for '" + entries[i].first + "'");
    }
    if (t.grad().size() != 0 && !t.grad().allFinite()) {
      throw TrainingFault("non-finite gradient in '" + entries[i].first + "'");
    }
  }
  ++state_.step;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(state_.step));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(state_.step));
  for (std::size_t i = 0; i < entries.size(); ++i) {
    Node& n = *entries[i].second.node();
    Mat& m = state_.m[i];
    Mat& v = state_.v[i];
    if (n.grad.size() == 0) {
      m *= config_.beta1;
      v *= config_.beta2;
    } else {
      m = config_.beta1 * m + (1.0 - config_.beta1) * n.grad;
      v = config_.beta2 * v + (1.0 - config_.beta2) * n.grad.cwiseAbs2();
    }
    n.value.array() -= config_.lr * (m.array() / c1) / ((v.array() / c2).sqrt() + config_.eps);
  }
}

}  // namespace tsc::nn
