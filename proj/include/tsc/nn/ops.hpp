#pragma once

#include <vector>

#include "tsc/nn/tensor.hpp"

namespace tsc::nn {

Tensor matmul(const Tensor& a, const Tensor& b);
/// Elementwise a + b. `b` may also be a 1 x cols row broadcast over rows.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);  // elementwise, same shape
Tensor scale(const Tensor& a, double s);
Tensor add_scalar(const Tensor& a, double s);
Tensor one_minus(const Tensor& a);

Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor exp(const Tensor& x);
Tensor log(const Tensor& x);
Tensor square(const Tensor& x);
/// Elementwise clamp; gradient is zero where the bound is active.
Tensor clip(const Tensor& x, double lo, double hi);
/// Elementwise minimum; ties route the gradient to `a`.
Tensor minimum(const Tensor& a, const Tensor& b);

/// Per-row normalization with learned gain (1 x cols) and bias (1 x cols).
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps = 1e-5);

/// Row-wise softmax restricted to entries with mask != 0 (mask empty: all on).
/// Masked entries are exactly 0; an all-masked row is all zeros.
Tensor softmax_rows(const Tensor& x, const Mat& mask = Mat());
Tensor log_softmax_rows(const Tensor& x);

Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor slice_cols(const Tensor& x, long start, long count);
Tensor slice_rows(const Tensor& x, long start, long count);
/// Rows picked by index (repeats allowed).
Tensor gather_rows(const Tensor& x, const std::vector<long>& index);
/// One entry per row: out(r, 0) = x(r, cols[r]).
Tensor pick_cols(const Tensor& x, const std::vector<long>& cols);
/// Multiplies row r by keep[r] (0 or 1); dropped rows carry no gradient.
Tensor mask_rows(const Tensor& x, const std::vector<double>& keep);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
Tensor sum_cols(const Tensor& x);  // rows x 1

struct AttentionOutput {
  Tensor out;       // B x d, heads concatenated
  Mat weights;      // B x (heads * M), head-major blocks of M
};

/// Scaled dot-product attention with per-row key masks. `query` is B x d,
/// `keys`/`values` are (B*M) x d with the M keys of row b stored contiguously,
/// `key_mask` is B x M. Weights of masked keys are exactly 0; a row with no
/// key yields a zero output.
AttentionOutput multi_head_attention(const Tensor& query, const Tensor& keys, const Tensor& values,
                                     const Mat& key_mask, int heads);

}  // namespace tsc::nn
