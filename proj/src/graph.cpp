#include "graph.hpp"

#include <cmath>
#include <sstream>

#include "ops.hpp"

namespace tag {

void PropagationConfig::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw ConfigError("propagation: alpha must lie in (0, 1], got " + std::to_string(alpha));
  if (k_prop < 0) throw ConfigError("propagation: k_prop must be >= 0");
  if (temporal_stride < 1) throw ConfigError("propagation: temporal_stride must be >= 1");
}

StGraph build_graph(int t_frames, int p_sites, const PropagationConfig& cfg) {
  if (t_frames < 1 || p_sites < 1)
    throw ShapeError("build_graph: need T >= 1 and P >= 1, got T=" + std::to_string(t_frames) +
                     " P=" + std::to_string(p_sites));
  cfg.validate();
  StGraph g;
  g.t_frames = t_frames;
  g.p_sites = p_sites;
  g.temporal_stride = cfg.temporal_stride;
  if (cfg.use_intra) {
    g.edges_intra.reserve(static_cast<std::size_t>(t_frames) * p_sites * (p_sites - 1) / 2);
    for (int t = 0; t < t_frames; ++t)
      for (int p = 0; p < p_sites; ++p)
        for (int q = p + 1; q < p_sites; ++q)
          g.edges_intra.emplace_back(g.node_id(t, p), g.node_id(t, q));
  }
  if (cfg.use_temp) {
    int s = cfg.temporal_stride;
    for (int t = 0; t + s < t_frames; ++t)
      for (int p = 0; p < p_sites; ++p)
        g.edges_temp.emplace_back(g.node_id(t, p), g.node_id(t + s, p));
  }
  // Analytic degrees: intra clique + temporal neighbours + self-loop.
  g.degree.assign(static_cast<std::size_t>(g.nodes()), 1);
  for (int t = 0; t < t_frames; ++t) {
    int d = 1;
    if (cfg.use_intra) d += p_sites - 1;
    if (cfg.use_temp) {
      int s = cfg.temporal_stride;
      if (t - s >= 0) ++d;
      if (t + s < t_frames) ++d;
    }
    for (int p = 0; p < p_sites; ++p) g.degree[static_cast<std::size_t>(g.node_id(t, p))] = d;
  }
  return g;
}

std::string StGraph::export_text() const {
  std::ostringstream os;
  auto line = [&](const char* type, int a, int b) {
    os << type << ' ' << a / p_sites << ' ' << a % p_sites << ' ' << b / p_sites << ' '
       << b % p_sites << '\n';
  };
  for (const auto& [a, b] : edges_intra) line("intra", a, b);
  for (const auto& [a, b] : edges_temp) line("temp", a, b);
  os << "degree";
  for (int d : degree) os << ' ' << d;
  os << '\n';
  return os.str();
}

Tensor normalized_adjacency_dense(const StGraph& g) {
  int n = g.nodes();
  std::vector<double> inv_sqrt_d(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) inv_sqrt_d[i] = 1.0 / std::sqrt(static_cast<double>(g.degree[i]));
  Tensor a({n, n});
  double* pa = a.data();
  for (int i = 0; i < n; ++i) pa[static_cast<std::size_t>(i) * n + i] = inv_sqrt_d[i] * inv_sqrt_d[i];
  auto put = [&](int i, int j) {
    double w = inv_sqrt_d[i] * inv_sqrt_d[j];
    pa[static_cast<std::size_t>(i) * n + j] = w;
    pa[static_cast<std::size_t>(j) * n + i] = w;
  };
  for (const auto& [i, j] : g.edges_intra) put(i, j);
  for (const auto& [i, j] : g.edges_temp) put(i, j);
  return a;
}

Tensor appnp_dense_operator(const Tensor& h0, const Tensor& adjacency, double alpha, int k_prop) {
  if (h0.rank() != 2) throw ShapeError("appnp: h0 must be [N x C], got " + shape_str(h0.shape()));
  if (adjacency.rank() != 2 || adjacency.dim(0) != adjacency.dim(1) || adjacency.dim(0) != h0.dim(0))
    throw ShapeError("appnp: operator " + shape_str(adjacency.shape()) + " does not match h0 " +
                     shape_str(h0.shape()));
  if (alpha >= 1.0 || k_prop == 0) return h0;
  Tensor h = h0;
  for (int k = 0; k < k_prop; ++k)
    h = add(scale(matmul(adjacency, h), 1.0 - alpha), scale(h0, alpha));
  return h;
}

Tensor appnp_dense(const Tensor& h0, const StGraph& g, const PropagationConfig& cfg) {
  cfg.validate();
  if (!cfg.active()) return h0;
  return appnp_dense_operator(h0, normalized_adjacency_dense(g), cfg.alpha, cfg.k_prop);
}

StructuredOp StructuredOp::from(const StGraph& g, const PropagationConfig& cfg) {
  StructuredOp op;
  op.t_frames = g.t_frames;
  op.p_sites = g.p_sites;
  op.stride = cfg.temporal_stride;
  op.use_intra = cfg.use_intra;
  op.use_temp = cfg.use_temp;
  op.inv_deg.resize(static_cast<std::size_t>(g.t_frames));
  for (int t = 0; t < g.t_frames; ++t)
    op.inv_deg[t] = 1.0 / static_cast<double>(g.degree[static_cast<std::size_t>(g.node_id(t, 0))]);
  op.cross.assign(static_cast<std::size_t>(g.t_frames), 0.0);
  for (int t = 0; t + op.stride < g.t_frames; ++t)
    op.cross[t] = std::sqrt(op.inv_deg[t] * op.inv_deg[t + op.stride]);
  return op;
}

void StructuredOp::apply(const double* x, double* y, int channels) const {
  const int t_n = t_frames, p_n = p_sites, c_n = channels;
  // Per-frame feature sums; self + clique collapse to S_t / d_t.
  static thread_local std::vector<double> frame_sum;
  if (use_intra) {
    frame_sum.assign(static_cast<std::size_t>(t_n) * c_n, 0.0);
    for (int t = 0; t < t_n; ++t) {
      double* s = frame_sum.data() + static_cast<std::size_t>(t) * c_n;
      for (int p = 0; p < p_n; ++p) {
        const double* row = x + (static_cast<std::size_t>(t) * p_n + p) * c_n;
        for (int c = 0; c < c_n; ++c) s[c] += row[c];
      }
    }
  }
  for (int t = 0; t < t_n; ++t) {
    const double inv_d = inv_deg[t];
    const double* sum_row = use_intra ? frame_sum.data() + static_cast<std::size_t>(t) * c_n : nullptr;
    const bool has_prev = use_temp && t - stride >= 0;
    const bool has_next = use_temp && t + stride < t_n;
    const double w_prev = has_prev ? cross[t - stride] : 0.0;
    const double w_next = has_next ? cross[t] : 0.0;
    for (int p = 0; p < p_n; ++p) {
      std::size_t i = (static_cast<std::size_t>(t) * p_n + p) * c_n;
      const double* xi = x + i;
      double* yi = y + i;
      const double* xp = has_prev ? x + i - static_cast<std::size_t>(stride) * p_n * c_n : nullptr;
      const double* xn = has_next ? x + i + static_cast<std::size_t>(stride) * p_n * c_n : nullptr;
      if (use_intra) {
        for (int c = 0; c < c_n; ++c) {
          double acc = sum_row[c] * inv_d;
          if (has_prev) acc += xp[c] * w_prev;
          if (has_next) acc += xn[c] * w_next;
          yi[c] = acc;
        }
      } else {
        for (int c = 0; c < c_n; ++c) {
          double acc = xi[c] * inv_d;  // self-loop only
          if (has_prev) acc += xp[c] * w_prev;
          if (has_next) acc += xn[c] * w_next;
          yi[c] = acc;
        }
      }
    }
  }
}

namespace {

// One recorded step: out = (1-alpha) * A_struct * h + alpha * h0.
// A is symmetric, so the adjoint reuses the same kernel:
// dh += (1-alpha) * A * dout, dh0 += alpha * dout.
Tensor structured_step(const Tensor& h, const Tensor& h0, const StructuredOp& op, double alpha,
                       int channels) {
  Tensor out = Tensor::uninitialized(h.shape());
  op.apply(h.data(), out.data(), channels);
  double keep = 1.0 - alpha;
  double* po = out.data();
  const double* p0 = h0.data();
  for (std::size_t i = 0; i < out.size(); ++i) po[i] = keep * po[i] + alpha * p0[i];
  if (active_tape() && (h.requires_grad() || h0.requires_grad())) {
    out.set_requires_grad(true);
    active_tape()->record([hi = h.impl(), zi = h0.impl(), oi = out.impl(), op, alpha, keep, channels] {
      if (!oi->grad) return;
      const auto& go = *oi->grad;
      if (hi->requires_grad) {
        std::vector<double> tmp(go.size());
        op.apply(go.data(), tmp.data(), channels);
        double* gh;
        if (hi->grad_target(&gh)) {
          for (std::size_t i = 0; i < go.size(); ++i) gh[i] = keep * tmp[i];
        } else {
          for (std::size_t i = 0; i < go.size(); ++i) gh[i] += keep * tmp[i];
        }
      }
      if (zi->requires_grad) {
        double* g0;
        if (zi->grad_target(&g0)) {
          for (std::size_t i = 0; i < go.size(); ++i) g0[i] = alpha * go[i];
        } else {
          for (std::size_t i = 0; i < go.size(); ++i) g0[i] += alpha * go[i];
        }
      }
    });
  }
  return out;
}

}  // namespace

Tensor appnp_structured(const Tensor& h0, const StGraph& g, const PropagationConfig& cfg) {
  cfg.validate();
  if (h0.rank() != 2) throw ShapeError("appnp: h0 must be [N x C], got " + shape_str(h0.shape()));
  if (h0.dim(0) != g.nodes())
    throw ShapeError("appnp: h0 rows " + std::to_string(h0.dim(0)) + " != graph nodes " +
                     std::to_string(g.nodes()));
  if (!cfg.active()) return h0;
  StructuredOp op = StructuredOp::from(g, cfg);
  int channels = h0.dim(1);
  Tensor h = h0;
  for (int k = 0; k < cfg.k_prop; ++k) h = structured_step(h, h0, op, cfg.alpha, channels);
  return h;
}

Tensor appnp_closed_form(const Tensor& h0, const StGraph& g, double alpha, int max_nodes) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw ConfigError("appnp_closed_form: alpha must lie in (0, 1], got " + std::to_string(alpha));
  if (alpha == 1.0) return h0;  // teleport only: the fixed point is H0
  int n = g.nodes();
  if (h0.rank() != 2 || h0.dim(0) != n) throw ShapeError("appnp_closed_form: h0 rows must equal node count");
  if (n > max_nodes)
    throw CapacityError("appnp_closed_form: " + std::to_string(n) + " nodes exceeds dense-solve cap " +
                        std::to_string(max_nodes));
  int c_n = h0.dim(1);
  Tensor a = normalized_adjacency_dense(g);

  // M = I - (1-alpha) A is SPD: eigenvalues of A lie in (-1, 1], so
  // eig(M) >= alpha > 0. Plain Cholesky, kept library-free on purpose so the
  // oracle does not share code with the matmul-backed iteration paths.
  std::vector<double> mat(static_cast<std::size_t>(n) * n);
  const double* pa = a.data();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      mat[static_cast<std::size_t>(i) * n + j] =
          (i == j ? 1.0 : 0.0) - (1.0 - alpha) * pa[static_cast<std::size_t>(i) * n + j];
  std::vector<double> chol(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = mat[static_cast<std::size_t>(i) * n + j];
      for (int k = 0; k < j; ++k)
        s -= chol[static_cast<std::size_t>(i) * n + k] * chol[static_cast<std::size_t>(j) * n + k];
      if (i == j) {
        if (s <= 0.0) throw Error("appnp_closed_form: matrix lost positive definiteness");
        chol[static_cast<std::size_t>(i) * n + j] = std::sqrt(s);
      } else {
        chol[static_cast<std::size_t>(i) * n + j] = s / chol[static_cast<std::size_t>(j) * n + j];
      }
    }
  }
  Tensor out(h0.shape());
  const double* b = h0.data();
  double* po = out.data();
  std::vector<double> y(static_cast<std::size_t>(n));
  for (int col = 0; col < c_n; ++col) {
    for (int i = 0; i < n; ++i) {
      double s = alpha * b[static_cast<std::size_t>(i) * c_n + col];
      for (int k = 0; k < i; ++k) s -= chol[static_cast<std::size_t>(i) * n + k] * y[k];
      y[i] = s / chol[static_cast<std::size_t>(i) * n + i];
    }
    for (int i = n - 1; i >= 0; --i) {
      double s = y[i];
      for (int k = i + 1; k < n; ++k) s -= chol[static_cast<std::size_t>(k) * n + i] * po[static_cast<std::size_t>(k) * c_n + col];
      po[static_cast<std::size_t>(i) * c_n + col] = s / chol[static_cast<std::size_t>(i) * n + i];
    }
  }
  return out;
}

std::vector<double> oversmoothing_profile(const Tensor& h0, const StGraph& g, int k_max) {
  if (h0.rank() != 2 || h0.dim(0) != g.nodes())
    throw ShapeError("oversmoothing_profile: h0 must be [N x C] over the graph's nodes");
  if (k_max < 0) throw std::invalid_argument("oversmoothing_profile: k_max must be >= 0");
  int n = g.nodes();
  int c_n = h0.dim(1);
  std::vector<double> v(static_cast<std::size_t>(n));
  double norm = 0.0;
  for (int i = 0; i < n; ++i) {
    v[i] = std::sqrt(static_cast<double>(g.degree[i]));
    norm += v[i] * v[i];
  }
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;

  PropagationConfig diffuse;  // edge switches on; alpha unused by the raw kernel
  diffuse.use_intra = !g.edges_intra.empty() || g.p_sites == 1;
  diffuse.use_temp = !g.edges_temp.empty() || g.t_frames == 1;
  diffuse.temporal_stride = g.temporal_stride;
  StructuredOp op = StructuredOp::from(g, diffuse);

  std::vector<double> x(h0.values().begin(), h0.values().end());
  std::vector<double> next(x.size());
  std::vector<double> residuals;
  residuals.reserve(static_cast<std::size_t>(k_max) + 1);
  auto residual = [&]() {
    double r2 = 0.0;
    for (int c = 0; c < c_n; ++c) {
      double proj = 0.0;
      for (int i = 0; i < n; ++i) proj += v[i] * x[static_cast<std::size_t>(i) * c_n + c];
      for (int i = 0; i < n; ++i) {
        double d = x[static_cast<std::size_t>(i) * c_n + c] - proj * v[i];
        r2 += d * d;
      }
    }
    return std::sqrt(r2);
  };
  residuals.push_back(residual());
  for (int k = 0; k < k_max; ++k) {
    op.apply(x.data(), next.data(), c_n);
    x.swap(next);
    residuals.push_back(residual());
  }
  return residuals;
}

}  // namespace tag
