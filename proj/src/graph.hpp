#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tensor.hpp"

namespace tag {

struct PropagationConfig {
  double alpha = 0.1;   // teleport (restart) probability, (0, 1]
  int k_prop = 10;      // propagation steps
  bool use_intra = true;  // fully-connected edges within each frame
  bool use_temp = true;   // same-site edges between frames `temporal_stride` apart
  int temporal_stride = 1;

  // With both edge families off (or no steps) the stage is the identity.
  bool active() const { return (use_intra || use_temp) && k_prop > 0 && alpha < 1.0; }
  void validate() const;
};

// Typed spatio-temporal graph over the T x P token sites, with self-loops
// folded into the degree vector. Node index: n = t * P + p.
struct StGraph {
  int t_frames = 0;
  int p_sites = 0;
  int temporal_stride = 1;
  std::vector<std::pair<int, int>> edges_intra;
  std::vector<std::pair<int, int>> edges_temp;
  std::vector<int> degree;  // counts the self-loop

  int nodes() const { return t_frames * p_sites; }
  int node_id(int t, int p) const { return t * p_sites + p; }

  // Debug format: one `type t p t' p'` line per edge plus a trailing
  // `degree d0 d1 ...` line. Indices are 0-based.
  std::string export_text() const;
};

StGraph build_graph(int t_frames, int p_sites, const PropagationConfig& cfg);

// A = D^{-1/2} (M + I) D^{-1/2} as a dense [N x N] tensor.
Tensor normalized_adjacency_dense(const StGraph& g);

// K steps of H <- (1 - alpha) * A * H + alpha * H0 on an explicit operator.
// Differentiable in h0 when recorded; `adjacency` is treated as constant.
Tensor appnp_dense_operator(const Tensor& h0, const Tensor& adjacency, double alpha, int k_prop);

// Reference propagation path: materializes A and iterates with dense matmuls.
Tensor appnp_dense(const Tensor& h0, const StGraph& g, const PropagationConfig& cfg);

// Structure-exploiting path: per step O(T*P*C) using per-frame feature sums
// (every node in a frame shares one degree). Matches the dense path to
// ~1e-10 and is the production path; fully differentiable in h0.
Tensor appnp_structured(const Tensor& h0, const StGraph& g, const PropagationConfig& cfg);

// Fixed point H* = alpha (I - (1-alpha) A)^{-1} H0 via a dense Cholesky
// solve (the system is symmetric positive definite). Validation oracle; the
// node count is capped.
Tensor appnp_closed_form(const Tensor& h0, const StGraph& g, double alpha, int max_nodes = 4096);

// Norm of the component of A^k h0 orthogonal to the dominant eigenvector
// sqrt(d), for k = 0..k_max. Pure diffusion (no teleport term).
std::vector<double> oversmoothing_profile(const Tensor& h0, const StGraph& g, int k_max);

// Raw structured operator y = A x for [N x C] buffers; shared by the
// propagation op and the benchmark.
struct StructuredOp {
  int t_frames = 0, p_sites = 0, stride = 1;
  bool use_intra = true, use_temp = true;
  std::vector<double> inv_deg;  // 1/d_t per frame
  std::vector<double> cross;    // 1/sqrt(d_t * d_{t+stride}) per frame t

  static StructuredOp from(const StGraph& g, const PropagationConfig& cfg);
  void apply(const double* x, double* y, int channels) const;
};

}  // namespace tag
