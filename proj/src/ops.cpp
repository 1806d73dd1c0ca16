#include "ops.hpp"

#include <algorithm>
#include <cmath>

#include "kernels.hpp"

namespace tag {

namespace {

constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;

FaultInjection g_fault = FaultInjection::none;

bool tracing(const Tensor& a) { return active_tape() && a.requires_grad(); }
bool tracing(const Tensor& a, const Tensor& b) {
  return active_tape() && (a.requires_grad() || b.requires_grad());
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape())
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
}

// Last-dim slice count and width for row-wise ops.
std::pair<std::size_t, std::size_t> rows_cols(const Tensor& x, const char* op) {
  if (x.rank() < 1) throw ShapeError(std::string(op) + ": rank-0 tensor");
  std::size_t cols = static_cast<std::size_t>(x.shape().back());
  return {x.size() / cols, cols};
}

// go is added into xi's gradient (identity-jacobian rules).
void accumulate_identity(const std::shared_ptr<TensorImpl>& xi, const DataVec& go) {
  double* gx;
  if (xi->grad_target(&gx)) {
    for (std::size_t i = 0; i < go.size(); ++i) gx[i] = go[i];
  } else {
    for (std::size_t i = 0; i < go.size(); ++i) gx[i] += go[i];
  }
}

}  // namespace

void set_fault_injection(FaultInjection f) { g_fault = f; }
FaultInjection fault_injection() { return g_fault; }

Tensor add(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "add");
  Tensor out = Tensor::uninitialized(a.shape());
  const double* pa = a.data();
  const double* pb = b.data();
  double* po = out.data();
  for (std::size_t i = 0; i < out.size(); ++i) po[i] = pa[i] + pb[i];
  if (tracing(a, b)) {
    out.set_requires_grad(true);
    active_tape()->record([ai = a.impl(), bi = b.impl(), oi = out.impl()] {
      if (!oi->grad) return;
      const auto& go = *oi->grad;
      if (ai->requires_grad) accumulate_identity(ai, go);
      if (bi->requires_grad) accumulate_identity(bi, go);
    });
  }
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "mul");
  Tensor out = Tensor::uninitialized(a.shape());
  const double* pa = a.data();
  const double* pb = b.data();
  double* po = out.data();
  for (std::size_t i = 0; i < out.size(); ++i) po[i] = pa[i] * pb[i];
  if (tracing(a, b)) {
    out.set_requires_grad(true);
    active_tape()->record([ai = a.impl(), bi = b.impl(), oi = out.impl()] {
      if (!oi->grad) return;
      const auto& go = *oi->grad;
      if (ai->requires_grad) {
        const auto& vb = *bi->data;
        double* ga;
        if (ai->grad_target(&ga)) {
          for (std::size_t i = 0; i < go.size(); ++i) ga[i] = go[i] * vb[i];
        } else {
          for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i] * vb[i];
        }
      }
      if (bi->requires_grad) {
        const auto& va = *ai->data;
        double* gb;
        if (bi->grad_target(&gb)) {
          for (std::size_t i = 0; i < go.size(); ++i) gb[i] = go[i] * va[i];
        } else {
          for (std::size_t i = 0; i < go.size(); ++i) gb[i] += go[i] * va[i];
        }
      }
    });
  }
  return out;
}

Tensor scale(const Tensor& x, double s) {
  Tensor out = Tensor::uninitialized(x.shape());
  const double* px = x.data();
  double* po = out.data();
  for (std::size_t i = 0; i < out.size(); ++i) po[i] = px[i] * s;
  if (tracing(x)) {
    out.set_requires_grad(true);
    active_tape()->record([xi = x.impl(), oi = out.impl(), s] {
      if (!oi->grad) return;
      const auto& go = *oi->grad;
      double* gx;
      if (xi->grad_target(&gx)) {
        for (std::size_t i = 0; i < go.size(); ++i) gx[i] = go[i] * s;
      } else {
        for (std::size_t i = 0; i < go.size(); ++i) gx[i] += go[i] * s;
      }
    });
  }
  return out;
}

Tensor add_rowvec(const Tensor& x, const Tensor& v) {
  if (v.rank() != 1 || x.shape().back() != v.dim(0))
    throw ShapeError("add_rowvec: vector " + shape_str(v.shape()) + " does not match last axis of " +
                     shape_str(x.shape()));
  auto [rows, cols] = rows_cols(x, "add_rowvec");
  Tensor out = Tensor::uninitialized(x.shape());
  const double* px = x.data();
  const double* pv = v.data();
  double* po = out.data();
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) po[r * cols + c] = px[r * cols + c] + pv[c];
  if (tracing(x, v)) {
    out.set_requires_grad(true);
    active_tape()->record([xi = x.impl(), vi = v.impl(), oi = out.impl(), rows, cols] {
      if (!oi->grad) return;
      const auto& go = *oi->grad;
      if (xi->requires_grad) accumulate_identity(xi, go);
      if (vi->requires_grad) {
        auto& gv = vi->grad_ref();  // row reduction; partial per pass
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t c = 0; c < cols; ++c) gv[c] += go[r * cols + c];
      }
    });
  }
  return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2)
    throw ShapeError("matmul: expects 2-D operands, got " + shape_str(a.shape()) + " and " +
                     shape_str(b.shape()));
  if (a.dim(1) != b.dim(0))
    throw ShapeError("matmul: inner dimensions disagree, " + shape_str(a.shape()) + " x " +
                     shape_str(b.shape()));
  int m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor out = Tensor::uninitialized({m, n});
  kernels::gemm(false, false, m, n, k, 1.0, a.data(), b.data(), 0.0, out.data());
  if (tracing(a, b)) {
    out.set_requires_grad(true);
    active_tape()->record([ai = a.impl(), bi = b.impl(), oi = out.impl(), m, n, k] {
      if (!oi->grad) return;
      const double* go = oi->grad->data();
      if (ai->requires_grad) {
        // dA (+)= dC * B^T
        double* ga;
        double beta = ai->grad_target(&ga) ? 0.0 : 1.0;
        kernels::gemm(false, true, m, k, n, 1.0, go, bi->data->data(), beta, ga);
      }
      if (bi->requires_grad) {
        // dB (+)= A^T * dC
        double sign = (g_fault == FaultInjection::matmul_grad_sign_flip) ? -1.0 : 1.0;
        double* gb;
        double beta = bi->grad_target(&gb) ? 0.0 : 1.0;
        kernels::gemm(true, false, k, n, m, sign, ai->data->data(), go, beta, gb);
      }
    });
  }
  return out;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2)
    throw ShapeError("matmul_nt: expects 2-D operands, got " + shape_str(a.shape()) + " and " +
                     shape_str(b.shape()));
  if (a.dim(1) != b.dim(1))
    throw ShapeError("matmul_nt: inner dimensions disagree, " + shape_str(a.shape()) + " x " +
                     shape_str(b.shape()) + "^T");
  int m = a.dim(0), k = a.dim(1), n = b.dim(0);
  Tensor out = Tensor::uninitialized({m, n});
  kernels::gemm(false, true, m, n, k, 1.0, a.data(), b.data(), 0.0, out.data());
  if (tracing(a, b)) {
    out.set_requires_grad(true);
    active_tape()->record([ai = a.impl(), bi = b.impl(), oi = out.impl(), m, n, k] {
      if (!oi->grad) return;
      const double* go = oi->grad->data();
      if (ai->requires_grad) {
        // dA (+)= dC * B
        double* ga;
        double beta = ai->grad_target(&ga) ? 0.0 : 1.0;
        kernels::gemm(false, false, m, k, n, 1.0, go, bi->data->data(), beta, ga);
      }
      if (bi->requires_grad) {
        // dB (+)= dC^T * A
        double* gb;
        double beta = bi->grad_target(&gb) ? 0.0 : 1.0;
        kernels::gemm(true, false, n, k, m, 1.0, go, ai->data->data(), beta, gb);
      }
    });
  }
  return out;
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.size())
    throw ShapeError("reshape: cannot view " + shape_str(x.shape()) + " as " + shape_str(shape));
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = std::move(shape);
  impl->data = x.impl()->data;  // zero-copy; row-major layout is unchanged
  Tensor out(impl);
  if (tracing(x)) {
    out.set_requires_grad(true);
    active_tape()->record([xi = x.impl(), oi = out.impl()] {
      if (!oi->grad) return;
      accumulate_identity(xi, *oi->grad);
    });
  }
  return out;
}

Tensor softmax_lastdim(const Tensor& x) {
  auto [rows, cols] = rows_cols(x, "softmax_lastdim");
  Tensor out = Tensor::uninitialized(x.shape());
  kernels::softmax_rows(x.data(), out.data(), rows, cols);
  if (tracing(x)) {
    out.set_requires_grad(true);
    active_tape()->record([xi = x.impl(), oi = out.impl(), rows, cols] {
      if (!oi->grad) return;
      double* gx;
      bool assign = xi->grad_target(&gx);
      kernels::softmax_backward_rows(oi->data->data(), oi->grad->data(), gx, assign, rows, cols);
    });
  }
  return out;
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
  auto [rows, cols] = rows_cols(x, "layer_norm");
  if (gain.rank() != 1 || bias.rank() != 1 || gain.dim(0) != static_cast<int>(cols) ||
      bias.dim(0) != static_cast<int>(cols))
    throw ShapeError("layer_norm: gain/bias must be length-" + std::to_string(cols) + " vectors");
  Tensor out = Tensor::uninitialized(x.shape());
  auto xhat = std::make_shared<std::vector<double>>(x.size());
  auto inv_std = std::make_shared<std::vector<double>>(rows);
  const double* px = x.data();
  const double* pg = gain.data();
  const double* pb = bias.data();
  double* po = out.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = px + r * cols;
    double mean = 0.0;
    for (std::size_t c = 0; c < cols; ++c) mean += xr[c];
    mean /= static_cast<double>(cols);
    double var = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      double d = xr[c] - mean;
      var += d * d;
    }
    var /= static_cast<double>(cols);
    double is = 1.0 / std::sqrt(var + eps);
    (*inv_std)[r] = is;
    double* xh = xhat->data() + r * cols;
    double* orow = po + r * cols;
    for (std::size_t c = 0; c < cols; ++c) {
      xh[c] = (xr[c] - mean) * is;
      orow[c] = pg[c] * xh[c] + pb[c];
    }
  }
  if (active_tape() && (x.requires_grad() || gain.requires_grad() || bias.requires_grad())) {
    out.set_requires_grad(true);
    active_tape()->record([xi = x.impl(), gi = gain.impl(), bi = bias.impl(), oi = out.impl(),
                           xhat, inv_std, rows, cols] {
      if (!oi->grad) return;
      const auto& go = *oi->grad;
      const double* pg = gi->data->data();
      if (gi->requires_grad) {
        auto& gg = gi->grad_ref();  // row reduction
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t c = 0; c < cols; ++c) gg[c] += go[r * cols + c] * (*xhat)[r * cols + c];
      }
      if (bi->requires_grad) {
        auto& gb = bi->grad_ref();  // row reduction
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t c = 0; c < cols; ++c) gb[c] += go[r * cols + c];
      }
      if (xi->requires_grad) {
        double* gx;
        bool assign = xi->grad_target(&gx);
        double inv_cols = 1.0 / static_cast<double>(cols);
        for (std::size_t r = 0; r < rows; ++r) {
          const double* gr = go.data() + r * cols;
          const double* xh = xhat->data() + r * cols;
          double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
          for (std::size_t c = 0; c < cols; ++c) {
            double dxh = gr[c] * pg[c];
            sum_dxhat += dxh;
            sum_dxhat_xhat += dxh * xh[c];
          }
          double is = (*inv_std)[r];
          double* gxr = gx + r * cols;
          for (std::size_t c = 0; c < cols; ++c) {
            double dxh = gr[c] * pg[c];
            double val = is * (dxh - inv_cols * sum_dxhat - xh[c] * inv_cols * sum_dxhat_xhat);
            if (assign)
              gxr[c] = val;
            else
              gxr[c] += val;
          }
        }
      }
    });
  }
  return out;
}

Tensor gelu(const Tensor& x) {
  Tensor out = Tensor::uninitialized(x.shape());
  const double* px = x.data();
  double* po = out.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    double cdf = 0.5 * (1.0 + std::erf(px[i] * kInvSqrt2));
    po[i] = px[i] * cdf;
  }
  if (tracing(x)) {
    out.set_requires_grad(true);
    active_tape()->record([xi = x.impl(), oi = out.impl()] {
      if (!oi->grad) return;
      const auto& go = *oi->grad;
      const auto& vx = *xi->data;
      double* gx;
      bool assign = xi->grad_target(&gx);
      for (std::size_t i = 0; i < go.size(); ++i) {
        double cdf = 0.5 * (1.0 + std::erf(vx[i] * kInvSqrt2));
        double pdf = kInvSqrt2Pi * std::exp(-0.5 * vx[i] * vx[i]);
        double val = go[i] * (cdf + vx[i] * pdf);
        if (assign)
          gx[i] = val;
        else
          gx[i] += val;
      }
    });
  }
  return out;
}

Tensor relu(const Tensor& x) {
  Tensor out = Tensor::uninitialized(x.shape());
  const double* px = x.data();
  double* po = out.data();
  for (std::size_t i = 0; i < out.size(); ++i) po[i] = px[i] > 0.0 ? px[i] : 0.0;
  if (tracing(x)) {
    out.set_requires_grad(true);
    active_tape()->record([xi = x.impl(), oi = out.impl()] {
      if (!oi->grad) return;
      const auto& go = *oi->grad;
      const auto& vx = *xi->data;
      double* gx;
      if (xi->grad_target(&gx)) {
        for (std::size_t i = 0; i < go.size(); ++i) gx[i] = vx[i] > 0.0 ? go[i] : 0.0;
      } else {
        for (std::size_t i = 0; i < go.size(); ++i)
          if (vx[i] > 0.0) gx[i] += go[i];
      }
    });
  }
  return out;
}

Tensor sum_all(const Tensor& x) {
  double s = 0.0;
  const double* px = x.data();
  for (std::size_t i = 0; i < x.size(); ++i) s += px[i];
  Tensor out = Tensor::scalar(s);
  if (tracing(x)) {
    out.set_requires_grad(true);
    active_tape()->record([xi = x.impl(), oi = out.impl()] {
      if (!oi->grad) return;
      double g = (*oi->grad)[0];
      double* gx;
      if (xi->grad_target(&gx)) {
        for (std::size_t i = 0; i < xi->data->size(); ++i) gx[i] = g;
      } else {
        for (std::size_t i = 0; i < xi->data->size(); ++i) gx[i] += g;
      }
    });
  }
  return out;
}

Tensor mean_rows(const Tensor& x) {
  if (x.rank() != 2) throw ShapeError("mean_rows: expects [N x C], got " + shape_str(x.shape()));
  std::size_t rows = static_cast<std::size_t>(x.dim(0));
  std::size_t cols = static_cast<std::size_t>(x.dim(1));
  Tensor out({static_cast<int>(cols)});
  const double* px = x.data();
  double* po = out.data();
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) po[c] += px[r * cols + c];
  double inv = 1.0 / static_cast<double>(rows);
  for (std::size_t c = 0; c < cols; ++c) po[c] *= inv;
  if (tracing(x)) {
    out.set_requires_grad(true);
    active_tape()->record([xi = x.impl(), oi = out.impl(), rows, cols, inv] {
      if (!oi->grad) return;
      const auto& go = *oi->grad;
      double* gx;
      if (xi->grad_target(&gx)) {
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t c = 0; c < cols; ++c) gx[r * cols + c] = go[c] * inv;
      } else {
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t c = 0; c < cols; ++c) gx[r * cols + c] += go[c] * inv;
      }
    });
  }
  return out;
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  int rows = parts[0].dim(0);
  int total = 0;
  for (const auto& p : parts) {
    if (p.rank() != 2 || p.dim(0) != rows)
      throw ShapeError("concat_cols: all parts must be 2-D with the same row count");
    total += p.dim(1);
  }
  Tensor out = Tensor::uninitialized({rows, total});
  double* po = out.data();
  int off = 0;
  for (const auto& p : parts) {
    int w = p.dim(1);
    const double* pp = p.data();
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < w; ++c)
        po[static_cast<std::size_t>(r) * total + off + c] = pp[static_cast<std::size_t>(r) * w + c];
    off += w;
  }
  bool any_grad = false;
  for (const auto& p : parts) any_grad = any_grad || p.requires_grad();
  if (active_tape() && any_grad) {
    out.set_requires_grad(true);
    std::vector<std::shared_ptr<TensorImpl>> impls;
    impls.reserve(parts.size());
    for (const auto& p : parts) impls.push_back(p.impl());
    active_tape()->record([impls, oi = out.impl(), rows, total] {
      if (!oi->grad) return;
      const auto& go = *oi->grad;
      int off = 0;
      for (const auto& pi : impls) {
        int w = pi->shape[1];
        if (pi->requires_grad) {
          double* gp;
          if (pi->grad_target(&gp)) {
            for (int r = 0; r < rows; ++r)
              for (int c = 0; c < w; ++c)
                gp[static_cast<std::size_t>(r) * w + c] =
                    go[static_cast<std::size_t>(r) * total + off + c];
          } else {
            for (int r = 0; r < rows; ++r)
              for (int c = 0; c < w; ++c)
                gp[static_cast<std::size_t>(r) * w + c] +=
                    go[static_cast<std::size_t>(r) * total + off + c];
          }
        }
        off += w;
      }
    });
  }
  return out;
}

Tensor slice_cols(const Tensor& x, int begin, int len) {
  if (x.rank() != 2) throw ShapeError("slice_cols: expects 2-D input");
  int rows = x.dim(0), cols = x.dim(1);
  if (begin < 0 || len <= 0 || begin + len > cols)
    throw ShapeError("slice_cols: invalid column range [" + std::to_string(begin) + ", " +
                     std::to_string(begin + len) + ") of " + std::to_string(cols));
  Tensor out = Tensor::uninitialized({rows, len});
  const double* px = x.data();
  double* po = out.data();
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < len; ++c)
      po[static_cast<std::size_t>(r) * len + c] = px[static_cast<std::size_t>(r) * cols + begin + c];
  if (tracing(x)) {
    out.set_requires_grad(true);
    active_tape()->record([xi = x.impl(), oi = out.impl(), rows, cols, begin, len] {
      if (!oi->grad) return;
      const auto& go = *oi->grad;
      auto& gx = xi->grad_ref();  // writes only a column band
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < len; ++c)
          gx[static_cast<std::size_t>(r) * cols + begin + c] += go[static_cast<std::size_t>(r) * len + c];
    });
  }
  return out;
}

Tensor cross_entropy_logits(const Tensor& logits, int label) {
  if (logits.rank() != 1) throw ShapeError("cross_entropy: logits must be 1-D");
  int n = logits.dim(0);
  if (label < 0 || label >= n)
    throw std::invalid_argument("cross_entropy: label " + std::to_string(label) + " out of range [0, " +
                                std::to_string(n) + ")");
  const double* pl = logits.data();
  double m = pl[0];
  for (int i = 1; i < n; ++i) m = std::max(m, pl[i]);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += std::exp(pl[i] - m);
  double lse = m + std::log(sum);
  Tensor out = Tensor::scalar(lse - pl[label]);
  if (tracing(logits)) {
    out.set_requires_grad(true);
    active_tape()->record([li = logits.impl(), oi = out.impl(), label, n, m, sum] {
      if (!oi->grad) return;
      double g = (*oi->grad)[0];
      const auto& vl = *li->data;
      double* gl;
      if (li->grad_target(&gl)) {
        for (int i = 0; i < n; ++i) {
          double p = std::exp(vl[i] - m) / sum;
          gl[i] = g * (p - (i == label ? 1.0 : 0.0));
        }
      } else {
        for (int i = 0; i < n; ++i) {
          double p = std::exp(vl[i] - m) / sum;
          gl[i] += g * (p - (i == label ? 1.0 : 0.0));
        }
      }
    });
  }
  return out;
}

}  // namespace tag
