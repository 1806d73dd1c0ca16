#include "kernels.hpp"

#include <Eigen/Dense>

namespace tag::kernels {

namespace {

using MatMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using MutMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

}  // namespace

void gemm(bool trans_a, bool trans_b, int m, int n, int k, double alpha,
          const double* a, const double* b, double beta, double* c) {
  MatMap ma(a, trans_a ? k : m, trans_a ? m : k);
  MatMap mb(b, trans_b ? n : k, trans_b ? k : n);
  MutMap mc(c, m, n);
  auto run = [&](auto&& lhs, auto&& rhs) {
    if (beta == 0.0) {
      mc.noalias() = alpha * (lhs * rhs);
    } else {
      mc *= beta;
      mc.noalias() += alpha * (lhs * rhs);
    }
  };
  if (!trans_a && !trans_b) {
    run(ma, mb);
  } else if (trans_a && !trans_b) {
    run(ma.transpose(), mb);
  } else if (!trans_a && trans_b) {
    run(ma, mb.transpose());
  } else {
    run(ma.transpose(), mb.transpose());
  }
}

void softmax_rows(const double* x, double* y, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    Eigen::Map<const Eigen::ArrayXd> in(x + r * cols, static_cast<Eigen::Index>(cols));
    Eigen::Map<Eigen::ArrayXd> out(y + r * cols, static_cast<Eigen::Index>(cols));
    double m = in.maxCoeff();
    out = (in - m).exp();
    out /= out.sum();
  }
}

void softmax_backward_rows(const double* y, const double* go, double* gx, bool assign,
                           std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    Eigen::Map<const Eigen::ArrayXd> yr(y + r * cols, static_cast<Eigen::Index>(cols));
    Eigen::Map<const Eigen::ArrayXd> gr(go + r * cols, static_cast<Eigen::Index>(cols));
    Eigen::Map<Eigen::ArrayXd> gxr(gx + r * cols, static_cast<Eigen::Index>(cols));
    double dot = (yr * gr).sum();
    if (assign)
      gxr = yr * (gr - dot);
    else
      gxr += yr * (gr - dot);
  }
}

void exp_array(const double* x, double* y, std::size_t n) {
  Eigen::Map<const Eigen::ArrayXd> in(x, static_cast<Eigen::Index>(n));
  Eigen::Map<Eigen::ArrayXd> out(y, static_cast<Eigen::Index>(n));
  out = in.exp();
}

}  // namespace tag::kernels
