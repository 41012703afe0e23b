#include "tsc/napo/losses.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "tsc/error.hpp"

namespace tsc::napo {

std::vector<double> compute_gae(const std::vector<double>& rewards, const std::vector<double>& values, double gamma,
                                double lambda) {
  if (values.size() != rewards.size() + 1) throw ShapeError("compute_gae: values need one bootstrap entry");
  std::vector<double> adv(rewards.size());
  double running = 0.0;
  for (std::size_t k = rewards.size(); k-- > 0;) {
    const double delta = rewards[k] + gamma * values[k + 1] - values[k];
    running = delta + gamma * lambda * running;
    adv[k] = running;
  }
  return adv;
}

std::vector<double> td_targets(const std::vector<double>& rewards, const std::vector<double>& values, double gamma) {
  if (values.size() != rewards.size() + 1) throw ShapeError("td_targets: values need one bootstrap entry");
  std::vector<double> out(rewards.size());
  for (std::size_t t = 0; t < rewards.size(); ++t) out[t] = rewards[t] + gamma * values[t + 1];
  return out;
}

std::vector<double> normalize(std::vector<double> x) {
  if (x.empty()) return x;
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  const double sd = std::max(std::sqrt(var / n), 1e-8);
  for (double& v : x) v = (v - mean) / sd;
  return x;
}

nn::Tensor ppo_policy_loss(const nn::Tensor& new_log_probs, const std::vector<double>& old_log_probs,
                           const std::vector<long>& actions, const std::vector<double>& advantages, double clip_eps) {
  const long rows = new_log_probs.rows();
  if (static_cast<long>(old_log_probs.size()) != rows || static_cast<long>(actions.size()) != rows ||
      static_cast<long>(advantages.size()) != rows) {
    throw ShapeError("ppo_policy_loss: batch sizes differ");
  }
  nn::Mat old_lp(rows, 1), adv(rows, 1);
  for (long r = 0; r < rows; ++r) {
    if (!std::isfinite(old_log_probs[r])) {
      throw DataCorruption("sample " + std::to_string(r) + ": recorded policy gave probability 0 to the taken action");
    }
    old_lp(r, 0) = old_log_probs[r];
    adv(r, 0) = advantages[r];
  }
  const nn::Tensor ratio = nn::exp(nn::sub(nn::pick_cols(new_log_probs, actions), nn::Tensor::constant(old_lp)));
  const nn::Tensor a = nn::Tensor::constant(adv);
  const nn::Tensor surrogate = nn::minimum(nn::mul(ratio, a), nn::mul(nn::clip(ratio, 1.0 - clip_eps, 1.0 + clip_eps), a));
  return nn::scale(nn::mean(surrogate), -1.0);
}

nn::Tensor entropy_loss(const nn::Tensor& log_probs) {
  return nn::scale(nn::sum(nn::mul(nn::exp(log_probs), log_probs)), 1.0 / static_cast<double>(log_probs.rows()));
}

nn::Tensor mse_loss(const nn::Tensor& prediction, const nn::Mat& target) {
  if (prediction.rows() != target.rows() || prediction.cols() != target.cols()) {
    throw ShapeError("mse_loss: prediction and target shapes differ");
  }
  return nn::mean(nn::square(nn::sub(prediction, nn::Tensor::constant(target))));
}

}  // namespace tsc::napo
