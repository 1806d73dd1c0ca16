#pragma once

#include <vector>

#include "tensor.hpp"

namespace tag {

// Elementwise; shapes must match exactly.
Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double s);

// x[... x C] + v[C], broadcast along the last axis.
Tensor add_rowvec(const Tensor& x, const Tensor& v);

// Strict 2-D matrix product. Backward: dA = dC*B^T, dB = A^T*dC.
Tensor matmul(const Tensor& a, const Tensor& b);

// a[m x k] * b[n x k]^T -> [m x n]; saves the explicit transpose in attention.
Tensor matmul_nt(const Tensor& a, const Tensor& b);

// Same element count, shared storage; gradient flows through unchanged.
Tensor reshape(const Tensor& x, Shape shape);

// Softmax over the last axis with max subtraction.
Tensor softmax_lastdim(const Tensor& x);

// Per-row mean-0/var-1 normalization over the last axis, then gain/bias.
// Population variance (divide by C).
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps);

// Exact x * Phi(x) with Phi the standard normal CDF (erf form).
Tensor gelu(const Tensor& x);
Tensor relu(const Tensor& x);

Tensor sum_all(const Tensor& x);

// [N x C] -> [C], mean over rows.
Tensor mean_rows(const Tensor& x);

// Column-wise concat of [N x d_i] blocks -> [N x sum(d_i)].
Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor slice_cols(const Tensor& x, int begin, int len);

// -log softmax(logits)[label], stable log-sum-exp form. logits is 1-D.
Tensor cross_entropy_logits(const Tensor& logits, int label);

// Negative-control hook: deliberately corrupts one backward rule so gradient
// checking can prove it would catch a bad derivative.
enum class FaultInjection { none, matmul_grad_sign_flip };
void set_fault_injection(FaultInjection f);
FaultInjection fault_injection();

}  // namespace tag
