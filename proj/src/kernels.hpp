#pragma once

#include <cstddef>

namespace tag::kernels {

// C = alpha * op(A) * op(B) + beta * C, row-major, op = optional transpose.
// m x k = op(A), k x n = op(B), C is m x n.
void gemm(bool trans_a, bool trans_b, int m, int n, int k, double alpha,
          const double* a, const double* b, double beta, double* c);

// Row-wise softmax with max subtraction; x and y may alias.
void softmax_rows(const double* x, double* y, std::size_t rows, std::size_t cols);

// gx (=|+=) y * (go - dot(go, y)) per row; assign picks = over +=.
void softmax_backward_rows(const double* y, const double* go, double* gx, bool assign,
                           std::size_t rows, std::size_t cols);

// y[i] = exp(x[i]), vectorized.
void exp_array(const double* x, double* y, std::size_t n);

}  // namespace tag::kernels
