#include "tsc/nn/ops.hpp"

#include <cmath>
#include <string>

#include "tsc/error.hpp"

namespace tsc::nn {
namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
}

// Gradient sink of parent k, or nullptr when it does not need one.
Mat* sink(const Node& self, std::size_t k) {
  Node& p = *self.parents[k];
  return p.requires_grad ? &p.grad_ref() : nullptr;
}

template <typename F>
Tensor unary(const Tensor& x, Mat value, F local_grad) {
  return make_result(std::move(value), {x}, [local_grad](const Node& self) {
    if (Mat* g = sink(self, 0)) *g += local_grad(self);
  });
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner dimensions differ (" + std::to_string(a.cols()) + " vs " +
                     std::to_string(b.rows()) + ")");
  }
  Mat out = a.value() * b.value();
  return make_result(std::move(out), {a, b}, [](const Node& self) {
    const Mat& A = self.parents[0]->value;
    const Mat& B = self.parents[1]->value;
    if (Mat* g = sink(self, 0)) g->noalias() += self.grad * B.transpose();
    if (Mat* g = sink(self, 1)) g->noalias() += A.transpose() * self.grad;
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (b.rows() == 1 && a.rows() != 1 && a.cols() == b.cols()) {
    Mat out = a.value().rowwise() + b.value().row(0);
    return make_result(std::move(out), {a, b}, [](const Node& self) {
      if (Mat* g = sink(self, 0)) *g += self.grad;
      if (Mat* g = sink(self, 1)) *g += self.grad.colwise().sum();
    });
  }
  require_same_shape(a, b, "add");
  return make_result(a.value() + b.value(), {a, b}, [](const Node& self) {
    if (Mat* g = sink(self, 0)) *g += self.grad;
    if (Mat* g = sink(self, 1)) *g += self.grad;
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  return make_result(a.value() - b.value(), {a, b}, [](const Node& self) {
    if (Mat* g = sink(self, 0)) *g += self.grad;
    if (Mat* g = sink(self, 1)) *g -= self.grad;
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  return make_result(a.value().cwiseProduct(b.value()), {a, b}, [](const Node& self) {
    if (Mat* g = sink(self, 0)) *g += self.grad.cwiseProduct(self.parents[1]->value);
    if (Mat* g = sink(self, 1)) *g += self.grad.cwiseProduct(self.parents[0]->value);
  });
}

Tensor scale(const Tensor& a, double s) {
  return unary(a, a.value() * s, [s](const Node& self) -> Mat { return self.grad * s; });
}

Tensor add_scalar(const Tensor& a, double s) {
  return unary(a, (a.value().array() + s).matrix(), [](const Node& self) -> Mat { return self.grad; });
}

Tensor one_minus(const Tensor& a) {
  return unary(a, (1.0 - a.value().array()).matrix(), [](const Node& self) -> Mat { return -self.grad; });
}

Tensor relu(const Tensor& x) {
  return unary(x, x.value().cwiseMax(0.0), [](const Node& self) -> Mat {
    return (self.parents[0]->value.array() > 0.0).select(self.grad, 0.0);
  });
}

Tensor sigmoid(const Tensor& x) {
  Mat y = (1.0 / (1.0 + (-x.value().array()).exp())).matrix();
  return make_result(y, {x}, [](const Node& self) {
    if (Mat* g = sink(self, 0)) *g += (self.grad.array() * self.value.array() * (1.0 - self.value.array())).matrix();
  });
}

Tensor tanh(const Tensor& x) {
  Mat y = x.value().array().tanh().matrix();
  return make_result(y, {x}, [](const Node& self) {
    if (Mat* g = sink(self, 0)) *g += (self.grad.array() * (1.0 - self.value.array().square())).matrix();
  });
}

Tensor exp(const Tensor& x) {
  Mat y = x.value().array().exp().matrix();
  return make_result(y, {x}, [](const Node& self) {
    if (Mat* g = sink(self, 0)) *g += self.grad.cwiseProduct(self.value);
  });
}

Tensor log(const Tensor& x) {
  return unary(x, x.value().array().log().matrix(), [](const Node& self) -> Mat {
    return (self.grad.array() / self.parents[0]->value.array()).matrix();
  });
}

Tensor square(const Tensor& x) {
  return unary(x, x.value().array().square().matrix(), [](const Node& self) -> Mat {
    return (2.0 * self.grad.array() * self.parents[0]->value.array()).matrix();
  });
}

Tensor clip(const Tensor& x, double lo, double hi) {
  return unary(x, x.value().cwiseMax(lo).cwiseMin(hi), [lo, hi](const Node& self) -> Mat {
    const auto& v = self.parents[0]->value.array();
    return ((v >= lo) && (v <= hi)).select(self.grad, 0.0);
  });
}

Tensor minimum(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "minimum");
  return make_result(a.value().cwiseMin(b.value()), {a, b}, [](const Node& self) {
    const auto take_a = (self.parents[0]->value.array() <= self.parents[1]->value.array());
    if (Mat* g = sink(self, 0)) *g += take_a.select(self.grad, 0.0);
    if (Mat* g = sink(self, 1)) *g += take_a.select(0.0, self.grad);
  });
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
  if (gain.rows() != 1 || gain.cols() != x.cols() || bias.rows() != 1 || bias.cols() != x.cols()) {
    throw ShapeError("layer_norm: gain/bias must be 1 x " + std::to_string(x.cols()));
  }
  const long n = x.cols();
  const Mat& X = x.value();
  Eigen::VectorXd mu = X.rowwise().mean();
  Mat centered = X.colwise() - mu;
  Eigen::VectorXd inv_std = ((centered.array().square().rowwise().sum() / static_cast<double>(n)) + eps).rsqrt();
  Mat xhat = centered.array().colwise() * inv_std.array();
  Mat out = (xhat.array().rowwise() * gain.value().row(0).array()).rowwise() + bias.value().row(0).array();
  return make_result(std::move(out), {x, gain, bias}, [xhat, inv_std, n](const Node& self) {
    const Mat& G = self.grad;
    const auto gamma = self.parents[1]->value.row(0).array();
    if (Mat* g = sink(self, 1)) *g += (G.array() * xhat.array()).colwise().sum().matrix();
    if (Mat* g = sink(self, 2)) *g += G.colwise().sum();
    if (Mat* g = sink(self, 0)) {
      Mat dxhat = G.array().rowwise() * gamma;
      Eigen::VectorXd m1 = dxhat.rowwise().mean();
      Eigen::VectorXd m2 = (dxhat.array() * xhat.array()).rowwise().mean();
      Mat dx = ((dxhat.colwise() - m1).array() - xhat.array().colwise() * m2.array()).colwise() * inv_std.array();
      *g += dx;
    }
  });
}

Tensor softmax_rows(const Tensor& x, const Mat& mask) {
  const Mat& X = x.value();
  if (mask.size() != 0 && (mask.rows() != X.rows() || mask.cols() != X.cols())) {
    throw ShapeError("softmax_rows: mask shape mismatch");
  }
  Mat y = Mat::Zero(X.rows(), X.cols());
  for (long r = 0; r < X.rows(); ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    for (long c = 0; c < X.cols(); ++c) {
      if (mask.size() == 0 || mask(r, c) != 0.0) mx = std::max(mx, X(r, c));
    }
    if (!std::isfinite(mx)) continue;  // every entry masked
    double total = 0.0;
    for (long c = 0; c < X.cols(); ++c) {
      if (mask.size() == 0 || mask(r, c) != 0.0) {
        y(r, c) = std::exp(X(r, c) - mx);
        total += y(r, c);
      }
    }
    y.row(r) /= total;
  }
  return make_result(y, {x}, [](const Node& self) {
    if (Mat* g = sink(self, 0)) {
      const Mat& Y = self.value;
      Eigen::VectorXd dot = (self.grad.array() * Y.array()).rowwise().sum();
      *g += (Y.array() * (self.grad.colwise() - dot).array()).matrix();
    }
  });
}

Tensor log_softmax_rows(const Tensor& x) {
  const Mat& X = x.value();
  Eigen::VectorXd mx = X.rowwise().maxCoeff();
  Mat shifted = X.colwise() - mx;
  Eigen::VectorXd lse = shifted.array().exp().rowwise().sum().log();
  Mat y = shifted.colwise() - lse;
  return make_result(y, {x}, [](const Node& self) {
    if (Mat* g = sink(self, 0)) {
      Mat p = self.value.array().exp();
      Eigen::VectorXd gs = self.grad.rowwise().sum();
      *g += self.grad - (p.array().colwise() * gs.array()).matrix();
    }
  });
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  long cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != parts[0].rows()) throw ShapeError("concat_cols: row counts differ");
    cols += p.cols();
  }
  Mat out(parts[0].rows(), cols);
  std::vector<long> offsets;
  long at = 0;
  for (const auto& p : parts) {
    out.middleCols(at, p.cols()) = p.value();
    offsets.push_back(at);
    at += p.cols();
  }
  return make_result(std::move(out), parts, [offsets](const Node& self) {
    for (std::size_t k = 0; k < offsets.size(); ++k) {
      if (Mat* g = sink(self, k)) *g += self.grad.middleCols(offsets[k], g->cols());
    }
  });
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  long rows = 0;
  for (const auto& p : parts) {
    if (p.cols() != parts[0].cols()) throw ShapeError("concat_rows: column counts differ");
    rows += p.rows();
  }
  Mat out(rows, parts[0].cols());
  std::vector<long> offsets;
  long at = 0;
  for (const auto& p : parts) {
    out.middleRows(at, p.rows()) = p.value();
    offsets.push_back(at);
    at += p.rows();
  }
  return make_result(std::move(out), parts, [offsets](const Node& self) {
    for (std::size_t k = 0; k < offsets.size(); ++k) {
      if (Mat* g = sink(self, k)) *g += self.grad.middleRows(offsets[k], g->rows());
    }
  });
}

Tensor slice_cols(const Tensor& x, long start, long count) {
  if (start < 0 || count < 0 || start + count > x.cols()) throw ShapeError("slice_cols: range out of bounds");
  return make_result(x.value().middleCols(start, count), {x}, [start, count](const Node& self) {
    if (Mat* g = sink(self, 0)) g->middleCols(start, count) += self.grad;
  });
}

Tensor slice_rows(const Tensor& x, long start, long count) {
  if (start < 0 || count < 0 || start + count > x.rows()) throw ShapeError("slice_rows: range out of bounds");
  return make_result(x.value().middleRows(start, count), {x}, [start, count](const Node& self) {
    if (Mat* g = sink(self, 0)) g->middleRows(start, count) += self.grad;
  });
}

Tensor gather_rows(const Tensor& x, const std::vector<long>& index) {
  Mat out(static_cast<long>(index.size()), x.cols());
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] < 0 || index[i] >= x.rows()) throw ShapeError("gather_rows: index out of range");
    out.row(static_cast<long>(i)) = x.value().row(index[i]);
  }
  return make_result(std::move(out), {x}, [index](const Node& self) {
    if (Mat* g = sink(self, 0)) {
      for (std::size_t i = 0; i < index.size(); ++i) g->row(index[i]) += self.grad.row(static_cast<long>(i));
    }
  });
}

Tensor pick_cols(const Tensor& x, const std::vector<long>& cols) {
  if (static_cast<long>(cols.size()) != x.rows()) throw ShapeError("pick_cols: one column per row expected");
  Mat out(x.rows(), 1);
  for (long r = 0; r < x.rows(); ++r) {
    if (cols[r] < 0 || cols[r] >= x.cols()) throw ShapeError("pick_cols: column out of range");
    out(r, 0) = x.value()(r, cols[r]);
  }
  return make_result(std::move(out), {x}, [cols](const Node& self) {
    if (Mat* g = sink(self, 0)) {
      for (long r = 0; r < g->rows(); ++r) (*g)(r, cols[r]) += self.grad(r, 0);
    }
  });
}

Tensor mask_rows(const Tensor& x, const std::vector<double>& keep) {
  if (static_cast<long>(keep.size()) != x.rows()) throw ShapeError("mask_rows: one flag per row expected");
  Mat out = x.value();
  for (long r = 0; r < out.rows(); ++r) {
    if (keep[r] == 0.0) out.row(r).setZero();
  }
  return make_result(std::move(out), {x}, [keep](const Node& self) {
    if (Mat* g = sink(self, 0)) {
      for (long r = 0; r < g->rows(); ++r) {
        if (keep[r] != 0.0) g->row(r) += self.grad.row(r);
      }
    }
  });
}

Tensor sum(const Tensor& x) {
  Mat out(1, 1);
  out(0, 0) = x.value().sum();
  return make_result(std::move(out), {x}, [](const Node& self) {
    if (Mat* g = sink(self, 0)) g->array() += self.grad(0, 0);
  });
}

Tensor mean(const Tensor& x) {
  const double n = static_cast<double>(x.value().size());
  return scale(sum(x), 1.0 / n);
}

Tensor sum_cols(const Tensor& x) {
  Mat out = x.value().rowwise().sum();
  return make_result(std::move(out), {x}, [](const Node& self) {
    if (Mat* g = sink(self, 0)) g->colwise() += self.grad.col(0);
  });
}

AttentionOutput multi_head_attention(const Tensor& query, const Tensor& keys, const Tensor& values,
                                     const Mat& key_mask, int heads) {
  const long B = query.rows();
  const long d = query.cols();
  const long M = key_mask.cols();
  if (heads <= 0 || d % heads != 0) throw ShapeError("multi_head_attention: heads must divide the model width");
  if (key_mask.rows() != B || keys.rows() != B * M || values.rows() != B * M || keys.cols() != d ||
      values.cols() != d) {
    throw ShapeError("multi_head_attention: expected query Bxd, keys/values (B*M)xd and mask BxM");
  }
  const long dh = d / heads;
  const double inv_scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const Mat& Q = query.value();
  const Mat& K = keys.value();
  const Mat& V = values.value();
  Mat weights = Mat::Zero(B, heads * M);
  Mat out = Mat::Zero(B, d);
  for (long b = 0; b < B; ++b) {
    for (long h = 0; h < heads; ++h) {
      double mx = -std::numeric_limits<double>::infinity();
      Eigen::VectorXd s(M);
      for (long m = 0; m < M; ++m) {
        if (key_mask(b, m) == 0.0) continue;
        s(m) = Q.row(b).segment(h * dh, dh).dot(K.row(b * M + m).segment(h * dh, dh)) * inv_scale;
        mx = std::max(mx, s(m));
      }
      if (!std::isfinite(mx)) continue;  // isolated: zero weights and output
      double total = 0.0;
      for (long m = 0; m < M; ++m) {
        if (key_mask(b, m) == 0.0) continue;
        weights(b, h * M + m) = std::exp(s(m) - mx);
        total += weights(b, h * M + m);
      }
      for (long m = 0; m < M; ++m) {
        if (key_mask(b, m) == 0.0) continue;
        weights(b, h * M + m) /= total;
        out.row(b).segment(h * dh, dh) += weights(b, h * M + m) * V.row(b * M + m).segment(h * dh, dh);
      }
    }
  }
  AttentionOutput result;
  result.weights = weights;
  result.out = make_result(std::move(out), {query, keys, values},
                           [weights, key_mask, B, M, heads, dh, inv_scale](const Node& self) {
    const Mat& Q = self.parents[0]->value;
    const Mat& K = self.parents[1]->value;
    const Mat& V = self.parents[2]->value;
    Mat* gq = sink(self, 0);
    Mat* gk = sink(self, 1);
    Mat* gv = sink(self, 2);
    Eigen::VectorXd dalpha(M);
    for (long b = 0; b < B; ++b) {
      for (long h = 0; h < heads; ++h) {
        const auto go = self.grad.row(b).segment(h * dh, dh);
        double dot = 0.0;
        for (long m = 0; m < M; ++m) {
          const double a = weights(b, h * M + m);
          if (a == 0.0 && key_mask(b, m) == 0.0) {
            dalpha(m) = 0.0;
            continue;
          }
          dalpha(m) = go.dot(V.row(b * M + m).segment(h * dh, dh));
          dot += a * dalpha(m);
          if (gv) gv->row(b * M + m).segment(h * dh, dh) += a * go;
        }
        for (long m = 0; m < M; ++m) {
          if (key_mask(b, m) == 0.0) continue;
          const double ds = weights(b, h * M + m) * (dalpha(m) - dot) * inv_scale;
          if (gq) gq->row(b).segment(h * dh, dh) += ds * K.row(b * M + m).segment(h * dh, dh);
          if (gk) gk->row(b * M + m).segment(h * dh, dh) += ds * Q.row(b).segment(h * dh, dh);
        }
      }
    }
  });
  return result;
}

}  // namespace tsc::nn
