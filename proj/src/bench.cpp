#include "bench.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "graph.hpp"
#include "kernels.hpp"
#include "rng.hpp"
#include "util.hpp"

namespace tag {

namespace {

double seconds_now() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

// Per-call seconds; repeats until at least min_time has elapsed so the small
// structured timings are not noise.
template <typename F>
double time_per_call(F&& fn, double min_time = 0.02) {
  double t0 = seconds_now();
  fn();
  double elapsed = seconds_now() - t0;
  if (elapsed >= min_time) return elapsed;
  int reps = static_cast<int>(min_time / std::max(elapsed, 1e-9)) + 1;
  t0 = seconds_now();
  for (int r = 0; r < reps; ++r) fn();
  return (seconds_now() - t0) / reps;
}

struct Instance {
  StGraph graph;
  std::vector<double> h0;
  int channels;
};

Instance make_instance(int t, int p, int c) {
  PropagationConfig cfg;
  Instance inst;
  inst.graph = build_graph(t, p, cfg);
  inst.channels = c;
  inst.h0.resize(static_cast<std::size_t>(inst.graph.nodes()) * c);
  Rng rng(123);
  for (auto& v : inst.h0) v = rng.uniform(-1.0, 1.0);
  return inst;
}

// Raw k-step loops on preallocated buffers; operator construction excluded.
double dense_run_seconds(const Instance& inst, double alpha, int k_steps) {
  int n = inst.graph.nodes(), c = inst.channels;
  Tensor a = normalized_adjacency_dense(inst.graph);
  std::vector<double> h(inst.h0), next(h.size());
  double keep = 1.0 - alpha;
  auto run = [&] {
    for (int k = 0; k < k_steps; ++k) {
      kernels::gemm(false, false, n, c, n, keep, a.data(), h.data(), 0.0, next.data());
      for (std::size_t i = 0; i < next.size(); ++i) next[i] += alpha * inst.h0[i];
      h.swap(next);
    }
  };
  return time_per_call(run) / k_steps;
}

double structured_run_seconds(const Instance& inst, double alpha, int k_steps) {
  PropagationConfig cfg;
  StructuredOp op = StructuredOp::from(inst.graph, cfg);
  std::vector<double> h(inst.h0), next(h.size());
  double keep = 1.0 - alpha;
  int c = inst.channels;
  auto run = [&] {
    for (int k = 0; k < k_steps; ++k) {
      op.apply(h.data(), next.data(), c);
      for (std::size_t i = 0; i < next.size(); ++i) next[i] = keep * next[i] + alpha * inst.h0[i];
      h.swap(next);
    }
  };
  return time_per_call(run) / k_steps;
}

double fit_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) {
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

BenchReport run_propagation_bench() {
  tune_allocator_once();
  BenchReport report;
  const double alpha = 0.1;

  const int sweep_t = 8, sweep_c = 64;
  std::vector<double> ps, dense_times, structured_times;
  for (int p : {16, 32, 64, 128}) {
    Instance inst = make_instance(sweep_t, p, sweep_c);
    BenchRow row{sweep_t, p, sweep_c, 0.0, 0.0};
    row.dense_step_s = dense_run_seconds(inst, alpha, 1);
    row.structured_step_s = structured_run_seconds(inst, alpha, 8);
    report.sweep.push_back(row);
    ps.push_back(p);
    dense_times.push_back(row.dense_step_s);
    structured_times.push_back(row.structured_step_s);
  }
  report.dense_exponent = fit_log_slope(ps, dense_times);
  report.structured_exponent = fit_log_slope(ps, structured_times);

  Instance paper = make_instance(64, 49, 256);
  const int k_paper = 10;
  report.paper_dense_s = dense_run_seconds(paper, alpha, k_paper) * k_paper;
  report.paper_structured_s = structured_run_seconds(paper, alpha, k_paper) * k_paper;
  report.paper_speedup = report.paper_dense_s / report.paper_structured_s;
  return report;
}

std::string BenchReport::to_text() const {
  std::ostringstream os;
  os << "propagation step time, dense vs structured\n";
  for (const auto& r : sweep)
    os << "  T=" << r.t_frames << " P=" << r.p_sites << " C=" << r.channels << "  dense "
       << fmt_g(r.dense_step_s * 1e3) << " ms  structured " << fmt_g(r.structured_step_s * 1e3)
       << " ms\n";
  os << "fitted exponent over P: dense " << fmt_g(dense_exponent) << ", structured "
     << fmt_g(structured_exponent) << "\n";
  os << "paper-scale point T=64 P=49 C=256 K=10: dense " << fmt_g(paper_dense_s) << " s, structured "
     << fmt_g(paper_structured_s) << " s, speedup " << fmt_g(paper_speedup) << "x\n";
  return os.str();
}

std::string BenchReport::to_csv() const {
  std::ostringstream os;
  os << "t_frames,p_sites,channels,dense_step_s,structured_step_s\n";
  for (const auto& r : sweep)
    os << r.t_frames << "," << r.p_sites << "," << r.channels << "," << fmt_g(r.dense_step_s) << ","
       << fmt_g(r.structured_step_s) << "\n";
  return os.str();
}

}  // namespace tag
