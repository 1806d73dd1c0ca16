#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "gradcheck.hpp"
#include "graph.hpp"
#include "ops.hpp"
#include "params.hpp"

using namespace tag;

namespace {

Tensor rand_t(Shape shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = rng.uniform(-1.0, 1.0);
  return t;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  REQUIRE(a.size() == b.size());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

double frob(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Independent brute-force oracle: builds M + I from the edge lists with naive
// loops and iterates the recurrence with a naive matrix product.
Tensor brute_force_appnp(const Tensor& h0, const StGraph& g, double alpha, int k_prop) {
  int n = g.nodes(), c = h0.dim(1);
  std::vector<double> m(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) m[static_cast<std::size_t>(i) * n + i] = 1.0;
  for (const auto& [i, j] : g.edges_intra) m[i * (std::size_t)n + j] = m[j * (std::size_t)n + i] = 1.0;
  for (const auto& [i, j] : g.edges_temp) m[i * (std::size_t)n + j] = m[j * (std::size_t)n + i] = 1.0;
  std::vector<double> deg(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) deg[i] += m[static_cast<std::size_t>(i) * n + j];
  std::vector<double> a(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      a[static_cast<std::size_t>(i) * n + j] =
          m[static_cast<std::size_t>(i) * n + j] / std::sqrt(deg[i] * deg[j]);
  std::vector<double> h(h0.values().begin(), h0.values().end()), next(h.size());
  for (int k = 0; k < k_prop; ++k) {
    for (int i = 0; i < n; ++i)
      for (int col = 0; col < c; ++col) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j)
          acc += a[static_cast<std::size_t>(i) * n + j] * h[static_cast<std::size_t>(j) * c + col];
        next[static_cast<std::size_t>(i) * c + col] =
            (1.0 - alpha) * acc + alpha * h0.data()[static_cast<std::size_t>(i) * c + col];
      }
    h = next;
  }
  return Tensor(h0.shape(), std::move(h));
}

Eigen::MatrixXd to_eigen(const Tensor& a) {
  int n = a.dim(0);
  Eigen::MatrixXd m(n, a.dim(1));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < a.dim(1); ++j) m(i, j) = a.data()[static_cast<std::size_t>(i) * a.dim(1) + j];
  return m;
}

}  // namespace

TEST_CASE("build_graph: hand-enumerated small cases") {
  PropagationConfig cfg;
  StGraph g = build_graph(2, 2, cfg);
  CHECK(g.edges_intra.size() == 2);
  CHECK(g.edges_temp.size() == 2);
  for (int d : g.degree) CHECK(d == 3);

  StGraph g2 = build_graph(3, 4, cfg);
  // Boundary frames: (P-1) + 1 temporal + self = 5; middle: 6.
  for (int p = 0; p < 4; ++p) {
    CHECK(g2.degree[g2.node_id(0, p)] == 5);
    CHECK(g2.degree[g2.node_id(1, p)] == 6);
    CHECK(g2.degree[g2.node_id(2, p)] == 5);
  }

  StGraph g3 = build_graph(1, 1, cfg);
  CHECK(g3.edges_intra.empty());
  CHECK(g3.edges_temp.empty());
  CHECK(g3.degree == std::vector<int>{1});

  CHECK_THROWS_AS(build_graph(0, 3, cfg), ShapeError);
  CHECK_THROWS_AS(build_graph(3, 0, cfg), ShapeError);
}

TEST_CASE("build_graph: analytic degrees match enumeration over the sweep grid") {
  PropagationConfig cfg;
  for (int t = 1; t <= 8; ++t)
    for (int p = 1; p <= 25; ++p) {
      StGraph g = build_graph(t, p, cfg);
      CHECK(g.edges_intra.size() ==
            static_cast<std::size_t>(t) * p * (p - 1) / 2);
      CHECK(g.edges_temp.size() == static_cast<std::size_t>(t - 1) * p);
      std::vector<int> counted(static_cast<std::size_t>(g.nodes()), 1);  // self-loop
      for (const auto& [i, j] : g.edges_intra) {
        counted[i]++;
        counted[j]++;
      }
      for (const auto& [i, j] : g.edges_temp) {
        counted[i]++;
        counted[j]++;
      }
      CHECK(counted == g.degree);
    }
}

TEST_CASE("export_text: oracle recounts degrees from the edge lines") {
  PropagationConfig cfg;
  StGraph g = build_graph(3, 4, cfg);
  std::istringstream is(g.export_text());
  std::vector<int> counted(static_cast<std::size_t>(g.nodes()), 1);
  std::vector<int> exported;
  std::string word;
  while (is >> word) {
    if (word == "intra" || word == "temp") {
      int t1, p1, t2, p2;
      is >> t1 >> p1 >> t2 >> p2;
      counted[g.node_id(t1, p1)]++;
      counted[g.node_id(t2, p2)]++;
      if (word == "intra") CHECK(t1 == t2);
      if (word == "temp") {
        CHECK(p1 == p2);
        CHECK(t2 - t1 == 1);
      }
    } else if (word == "degree") {
      int d;
      while (is >> d) exported.push_back(d);
    }
  }
  CHECK(counted == g.degree);
  CHECK(exported == g.degree);
}

TEST_CASE("normalized adjacency: values, symmetry, single node") {
  PropagationConfig cfg;
  StGraph g = build_graph(2, 2, cfg);
  Tensor a = normalized_adjacency_dense(g);
  int n = 4;
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) {
      double v = a.data()[i * n + j];
      CHECK((v == 0.0 || v == doctest::Approx(1.0 / 3).epsilon(1e-15)));
      row += v;
    }
    CHECK(row == doctest::Approx(1.0).epsilon(1e-14));  // equal degrees
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) CHECK(a.data()[i * n + j] == a.data()[j * n + i]);

  StGraph single = build_graph(1, 1, cfg);
  Tensor a1 = normalized_adjacency_dense(single);
  CHECK(a1.size() == 1);
  CHECK(a1.data()[0] == 1.0);
}

TEST_CASE("appnp: alpha=1 and k=0 return the input tensor unchanged") {
  PropagationConfig cfg;
  StGraph g = build_graph(2, 3, cfg);
  Rng rng(3);
  Tensor h0 = rand_t({6, 2}, rng);

  PropagationConfig teleport_only = cfg;
  teleport_only.alpha = 1.0;
  Tensor out = appnp_structured(h0, g, teleport_only);
  CHECK(out.impl() == h0.impl());  // bit-identical by construction
  CHECK(appnp_dense(h0, g, teleport_only).impl() == h0.impl());

  PropagationConfig no_steps = cfg;
  no_steps.k_prop = 0;
  CHECK(appnp_structured(h0, g, no_steps).impl() == h0.impl());

  PropagationConfig no_edges = cfg;
  no_edges.use_intra = no_edges.use_temp = false;
  CHECK(appnp_structured(h0, g, no_edges).impl() == h0.impl());
}

TEST_CASE("appnp: frozen one-step example on the T=2,P=2 graph") {
  PropagationConfig cfg;
  cfg.alpha = 0.5;
  cfg.k_prop = 1;
  StGraph g = build_graph(2, 2, cfg);
  Tensor h0({4, 1}, {3.0, 0.0, 0.0, 0.0});
  // One step of the all-1/3 operator: [2, 0.5, 0.5, 0].
  Tensor expected({4, 1}, {2.0, 0.5, 0.5, 0.0});
  CHECK(max_abs_diff(appnp_dense(h0, g, cfg), expected) < 1e-14);
  CHECK(max_abs_diff(appnp_structured(h0, g, cfg), expected) < 1e-14);
  CHECK(max_abs_diff(brute_force_appnp(h0, g, cfg.alpha, cfg.k_prop), expected) < 1e-14);
}

TEST_CASE("appnp: structured equals dense on 50 random instances, all switch combos") {
  Rng rng(17);
  int instances = 0;
  while (instances < 50) {
    int t = 1 + static_cast<int>(rng.below(8));
    int p = 1 + static_cast<int>(rng.below(16));
    int c = 1 + static_cast<int>(rng.below(8));
    for (bool use_intra : {true, false})
      for (bool use_temp : {true, false}) {
        PropagationConfig cfg;
        cfg.use_intra = use_intra;
        cfg.use_temp = use_temp;
        cfg.alpha = rng.uniform(0.05, 0.95);
        cfg.k_prop = 1 + static_cast<int>(rng.below(6));
        StGraph g = build_graph(t, p, cfg);
        Tensor h0 = rand_t({g.nodes(), c}, rng);
        Tensor dense = appnp_dense(h0, g, cfg);
        Tensor structured = appnp_structured(h0, g, cfg);
        CHECK(max_abs_diff(structured, dense) < 1e-10);
      }
    ++instances;
  }
}

TEST_CASE("appnp: structured equals brute-force oracle on random instances") {
  Rng rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    PropagationConfig cfg;
    cfg.alpha = rng.uniform(0.1, 0.9);
    cfg.k_prop = 1 + static_cast<int>(rng.below(5));
    int t = 1 + static_cast<int>(rng.below(5));
    int p = 1 + static_cast<int>(rng.below(6));
    StGraph g = build_graph(t, p, cfg);
    Tensor h0 = rand_t({g.nodes(), 3}, rng);
    CHECK(max_abs_diff(appnp_structured(h0, g, cfg),
                       brute_force_appnp(h0, g, cfg.alpha, cfg.k_prop)) < 1e-10);
  }
}

TEST_CASE("appnp: temporal stride variant stays consistent across paths") {
  Rng rng(29);
  PropagationConfig cfg;
  cfg.temporal_stride = 2;
  cfg.k_prop = 3;
  StGraph g = build_graph(5, 3, cfg);
  CHECK(g.edges_temp.size() == static_cast<std::size_t>(3) * 3);  // (T - s) * P
  std::vector<int> counted(static_cast<std::size_t>(g.nodes()), 1);
  for (const auto& [i, j] : g.edges_intra) {
    counted[i]++;
    counted[j]++;
  }
  for (const auto& [i, j] : g.edges_temp) {
    counted[i]++;
    counted[j]++;
  }
  CHECK(counted == g.degree);
  Tensor h0 = rand_t({g.nodes(), 2}, rng);
  CHECK(max_abs_diff(appnp_structured(h0, g, cfg), appnp_dense(h0, g, cfg)) < 1e-12);
  CHECK(max_abs_diff(appnp_structured(h0, g, cfg), brute_force_appnp(h0, g, cfg.alpha, cfg.k_prop)) <
        1e-12);
}

TEST_CASE("appnp_closed_form: residual identity and convergence of the iteration") {
  Rng rng(31);
  PropagationConfig cfg;
  cfg.alpha = 0.2;
  StGraph g = build_graph(3, 3, cfg);
  Tensor h0 = rand_t({9, 2}, rng);
  Tensor star = appnp_closed_form(h0, g, cfg.alpha);

  // Defining equation: H* = (1-alpha) A H* + alpha H0.
  Tensor a = normalized_adjacency_dense(g);
  Tensor residual = add(scale(matmul(a, star), 1.0 - cfg.alpha), scale(h0, cfg.alpha));
  CHECK(max_abs_diff(residual, star) < 1e-10);

  PropagationConfig many = cfg;
  many.k_prop = 400;
  CHECK(max_abs_diff(appnp_dense(h0, g, many), star) < 1e-8);

  // alpha = 1 limit: the fixed point is H0 itself.
  CHECK(appnp_closed_form(h0, g, 1.0).impl() == h0.impl());

  CHECK_THROWS_AS(appnp_closed_form(h0, g, 0.2, 4), CapacityError);
}

TEST_CASE("appnp: geometric convergence bound against the closed form") {
  Rng rng(37);
  for (double alpha : {0.05, 0.1, 0.5}) {
    PropagationConfig cfg;
    cfg.alpha = alpha;
    StGraph g = build_graph(3, 3, cfg);
    Tensor h0 = rand_t({9, 2}, rng);
    Tensor star = appnp_closed_form(h0, g, alpha);
    std::vector<double> diff0(h0.size());
    for (std::size_t i = 0; i < h0.size(); ++i) diff0[i] = h0.data()[i] - star.data()[i];
    double base = frob(diff0);
    for (int k = 1; k <= 30; ++k) {
      PropagationConfig step = cfg;
      step.k_prop = k;
      Tensor hk = appnp_dense(h0, g, step);
      std::vector<double> diff(h0.size());
      for (std::size_t i = 0; i < h0.size(); ++i) diff[i] = hk.data()[i] - star.data()[i];
      CHECK(frob(diff) <= std::pow(1.0 - alpha, k) * base * (1.0 + 1e-10) + 1e-300);
    }
  }
}

TEST_CASE("spectral structure: eigenvalue 1 simple with eigenvector sqrt(d)") {
  PropagationConfig cfg;
  for (auto [t, p] : {std::pair{2, 4}, {8, 25}, {5, 8}, {1, 7}, {6, 1}}) {
    StGraph g = build_graph(t, p, cfg);
    int n = g.nodes();
    REQUIRE(n <= 200);
    Eigen::MatrixXd a = to_eigen(normalized_adjacency_dense(g));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
    const auto& evals = solver.eigenvalues();
    CHECK(evals(n - 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(evals(0) > -1.0 + 1e-9);  // self-loops kill the -1 end
    if (n > 1) CHECK(evals(n - 2) < 1.0 - 1e-9);  // simple top eigenvalue (connected)
    Eigen::VectorXd v = solver.eigenvectors().col(n - 1);
    Eigen::VectorXd sqrt_d(n);
    for (int i = 0; i < n; ++i) sqrt_d(i) = std::sqrt(static_cast<double>(g.degree[i]));
    sqrt_d.normalize();
    CHECK(std::abs(v.dot(sqrt_d)) == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("spectral radius <= 1 by power iteration") {
  PropagationConfig cfg;
  Rng rng(41);
  StGraph g = build_graph(4, 5, cfg);
  Tensor a = normalized_adjacency_dense(g);
  int n = g.nodes();
  std::vector<double> x(n);
  for (auto& v : x) v = rng.uniform(-1.0, 1.0);
  double lambda = 0.0;
  for (int it = 0; it < 500; ++it) {
    std::vector<double> y(n, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) y[i] += a.data()[static_cast<std::size_t>(i) * n + j] * x[j];
    double norm = frob(y);
    lambda = norm / frob(x);
    for (int i = 0; i < n; ++i) x[i] = y[i] / norm;
  }
  CHECK(lambda <= 1.0 + 1e-12);
  CHECK(lambda == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("oversmoothing: sqrt(d) component is invariant, the rest decays at lambda_2") {
  PropagationConfig cfg;
  StGraph g = build_graph(2, 4, cfg);
  int n = g.nodes();

  // h0 proportional to sqrt(d) per column: residual 0 at every k.
  Tensor aligned({n, 2});
  for (int i = 0; i < n; ++i) {
    aligned.data()[i * 2 + 0] = std::sqrt(static_cast<double>(g.degree[i]));
    aligned.data()[i * 2 + 1] = -2.0 * std::sqrt(static_cast<double>(g.degree[i]));
  }
  for (double r : oversmoothing_profile(aligned, g, 20)) CHECK(r < 1e-12);

  Rng rng(43);
  Tensor h0 = rand_t({n, 3}, rng);
  std::vector<double> res = oversmoothing_profile(h0, g, 200);
  REQUIRE(res.size() == 201);
  CHECK(res[200] < 1e-6 * res[0]);

  // Eigen-oracle: per-step contraction is bounded by |lambda|_2.
  Eigen::MatrixXd a = to_eigen(normalized_adjacency_dense(g));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
  double lambda2 = 0.0;
  for (int i = 0; i < n - 1; ++i) lambda2 = std::max(lambda2, std::abs(solver.eigenvalues()(i)));
  for (int k = 0; k < 20; ++k) CHECK(res[k + 1] <= lambda2 * res[k] + 1e-12 * res[0]);
  // Monotone decay beyond the transient.
  for (int k = 0; k < 200; ++k) CHECK(res[k + 1] <= res[k] + 1e-12 * res[0]);
}

TEST_CASE("teleport anchors the output to h0 while pure diffusion drifts") {
  PropagationConfig cfg;
  cfg.alpha = 0.1;
  cfg.k_prop = 200;
  StGraph g = build_graph(2, 4, cfg);
  Rng rng(47);
  Tensor h0 = rand_t({g.nodes(), 3}, rng);
  Tensor anchored = appnp_dense(h0, g, cfg);

  // Pure diffusion: A^k h0 via repeated dense products.
  Tensor a = normalized_adjacency_dense(g);
  Tensor diffused = h0;
  for (int k = 0; k < cfg.k_prop; ++k) diffused = matmul(a, diffused);

  std::vector<double> d_anchor(h0.size()), d_diffuse(h0.size());
  for (std::size_t i = 0; i < h0.size(); ++i) {
    d_anchor[i] = anchored.data()[i] - h0.data()[i];
    d_diffuse[i] = diffused.data()[i] - h0.data()[i];
  }
  CHECK(frob(d_anchor) < frob(d_diffuse));
}

TEST_CASE("node relabeling equivariance at the operator level") {
  PropagationConfig cfg;
  cfg.alpha = 0.3;
  cfg.k_prop = 4;
  StGraph g = build_graph(3, 4, cfg);
  int n = g.nodes();
  Rng rng(53);
  Tensor h0 = rand_t({n, 2}, rng);
  Tensor a = normalized_adjacency_dense(g);

  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = (i * 5 + 3) % n;  // gcd(5, 12) = 1

  Tensor a_p({n, n});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      a_p.data()[i * n + j] = a.data()[perm[i] * n + perm[j]];
  Tensor h0_p({n, 2});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 2; ++j) h0_p.data()[i * 2 + j] = h0.data()[perm[i] * 2 + j];

  Tensor out = appnp_dense_operator(h0, a, cfg.alpha, cfg.k_prop);
  Tensor out_p = appnp_dense_operator(h0_p, a_p, cfg.alpha, cfg.k_prop);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK(out_p.data()[i * 2 + j] == doctest::Approx(out.data()[perm[i] * 2 + j]).epsilon(1e-12));
}

TEST_CASE("appnp gradients: both paths agree with central differences") {
  Rng rng(59);
  PropagationConfig cfg;
  cfg.alpha = 0.2;
  cfg.k_prop = 3;
  StGraph g = build_graph(2, 3, cfg);
  Tensor probe = rand_t({g.nodes(), 2}, rng);

  ParamStore store_s;
  Tensor h0s = store_s.add("h0", rand_t({g.nodes(), 2}, rng));
  auto fn_s = [&]() { return sum_all(mul(appnp_structured(h0s, g, cfg), probe)); };
  CHECK(grad_check(fn_s, store_s, 1e-6).max_rel_err < 1e-5);

  ParamStore store_d;
  Tensor h0d = store_d.add("h0", Tensor(h0s.shape(), {h0s.values().begin(), h0s.values().end()}));
  auto fn_d = [&]() { return sum_all(mul(appnp_dense(h0d, g, cfg), probe)); };
  CHECK(grad_check(fn_d, store_d, 1e-6).max_rel_err < 1e-5);

  // Same loss, same inputs: the two paths' gradients match closely.
  for (std::size_t i = 0; i < h0s.size(); ++i)
    CHECK(h0s.grad()[i] == doctest::Approx(h0d.grad()[i]).epsilon(1e-9));
}

TEST_CASE("propagation config validation") {
  PropagationConfig cfg;
  cfg.alpha = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.alpha = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.alpha = 0.5;
  cfg.k_prop = -1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.k_prop = 5;
  cfg.temporal_stride = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
