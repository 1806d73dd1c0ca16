#pragma once

#include <string>
#include <vector>

namespace tag {

struct BenchRow {
  int t_frames, p_sites, channels;
  double dense_step_s;       // seconds per propagation step
  double structured_step_s;
};

struct BenchReport {
  std::vector<BenchRow> sweep;     // P sweep at fixed T, C
  double dense_exponent = 0.0;     // fitted slope of log(time) vs log(P)
  double structured_exponent = 0.0;
  // Paper-scale token count: T=64, P=49, C=256, K=10, full runs.
  double paper_dense_s = 0.0;
  double paper_structured_s = 0.0;
  double paper_speedup = 0.0;

  std::string to_text() const;
  std::string to_csv() const;
};

// Times one step of H <- (1-alpha) A H + alpha H0 on both paths across
// P in {16, 32, 64, 128} (T=8, C=64), fits the scaling exponents over P, and
// measures the full K=10 run at the paper-scale point.
BenchReport run_propagation_bench();

}  // namespace tag
