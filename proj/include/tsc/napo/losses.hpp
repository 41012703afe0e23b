#pragma once

#include <vector>

#include "tsc/nn/ops.hpp"

namespace tsc::napo {

/// Backward recursion over one agent's trajectory. `values` has T + 1 entries,
/// the last being the bootstrap (0 at a terminal cut).
std::vector<double> compute_gae(const std::vector<double>& rewards, const std::vector<double>& values, double gamma,
                                double lambda);

/// r_t + gamma * V_{t+1}.
std::vector<double> td_targets(const std::vector<double>& rewards, const std::vector<double>& values, double gamma);

/// Zero mean, unit std (std floored at 1e-8). A single entry maps to 0.
std::vector<double> normalize(std::vector<double> x);

/// Clipped surrogate: -mean(min(s * A, clip(s, 1 - eps, 1 + eps) * A)) with
/// s = pi_new(a) / pi_old(a). Throws DataCorruption when an old probability
/// of a taken action is 0.
nn::Tensor ppo_policy_loss(const nn::Tensor& new_log_probs, const std::vector<double>& old_log_probs,
                           const std::vector<long>& actions, const std::vector<double>& advantages, double clip_eps);

/// mean over rows of sum_a pi log pi (minimizing it raises entropy).
nn::Tensor entropy_loss(const nn::Tensor& log_probs);

/// Mean squared error over every entry.
nn::Tensor mse_loss(const nn::Tensor& prediction, const nn::Mat& target);

}  // namespace tsc::napo
