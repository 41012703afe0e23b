#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <vector>

namespace tsc::nn {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Node {
  Mat value;
  Mat grad;  // empty until something flows into it
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(const Node&)> backward_fn;  // pushes this->grad into parents

  Mat& grad_ref();
};

/// 2-D f64 tensor with reverse-mode autodiff. Copies share the node.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  static Tensor constant(Mat value);
  static Tensor parameter(Mat value);  // leaf that requires grad
  static Tensor scalar(double v);

  bool defined() const { return static_cast<bool>(node_); }
  long rows() const { return node_->value.rows(); }
  long cols() const { return node_->value.cols(); }
  const Mat& value() const { return node_->value; }
  Mat& mutable_value() const { return node_->value; }  // handle semantics: shared node
  const Mat& grad() const { return node_->grad; }
  bool requires_grad() const { return node_->requires_grad; }
  double item() const;
  void zero_grad();

  /// Same value, cut from the graph.
  Tensor detach() const { return constant(node_->value); }

  /// Reverse pass from this scalar. Leaf gradients accumulate across calls.
  void backward() const;

  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

/// Builds an op result; records parents and the backward closure only when
/// grad mode is on and some parent requires grad.
Tensor make_result(Mat value, std::vector<Tensor> parents, std::function<void(const Node&)> backward_fn);

bool grad_enabled();

/// Disables graph recording in its scope.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

}  // namespace tsc::nn
