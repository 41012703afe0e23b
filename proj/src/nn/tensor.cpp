#include "tsc/nn/tensor.hpp"

#include <unordered_set>

#include "tsc/error.hpp"

namespace tsc::nn {
namespace {

thread_local bool g_grad_enabled = true;

}  // namespace

Mat& Node::grad_ref() {
  if (grad.size() == 0) grad = Mat::Zero(value.rows(), value.cols());
  return grad;
}

Tensor Tensor::constant(Mat value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  return Tensor(n);
}

Tensor Tensor::parameter(Mat value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = true;
  return Tensor(n);
}

Tensor Tensor::scalar(double v) {
  Mat m(1, 1);
  m(0, 0) = v;
  return constant(std::move(m));
}

double Tensor::item() const {
  if (rows() != 1 || cols() != 1) throw ShapeError("item() needs a 1x1 tensor");
  return node_->value(0, 0);
}

void Tensor::zero_grad() {
  if (node_->grad.size() != 0) node_->grad.setZero();
}

void Tensor::backward() const {
  if (!node_) throw ShapeError("backward on an undefined tensor");
  if (rows() != 1 || cols() != 1) throw ShapeError("backward needs a scalar loss");
  if (!node_->requires_grad) throw ShapeError("backward through a detached graph: loss does not depend on any parameter");

  // Iterative post-order DFS; recurrent graphs get deep.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{node_.get(), 0}};
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, i] = stack.back();
    if (i < n->parents.size()) {
      Node* p = n->parents[i++].get();
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }
  for (Node* n : order) {
    if (n->backward_fn) n->grad.resize(0, 0);  // interior nodes start clean on every pass
  }
  node_->grad_ref().array() += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn && n->grad.size() != 0) n->backward_fn(*n);
  }
}

Tensor make_result(Mat value, std::vector<Tensor> parents, std::function<void(const Node&)> backward_fn) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  if (g_grad_enabled) {
    bool any = false;
    for (const auto& p : parents) any = any || p.requires_grad();
    if (any) {
      n->requires_grad = true;
      for (auto& p : parents) n->parents.push_back(p.node());
      n->backward_fn = std::move(backward_fn);
    }
  }
  return Tensor(n);
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

}  // namespace tsc::nn
