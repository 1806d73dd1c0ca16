#pragma once

#include <vector>

#include "encoder.hpp"
#include "tensor.hpp"

namespace tag {

// The token grid F: one C-dimensional feature per (t, p) site, P = H*W,
// N = T*P, token index n = t*P + (h*W + w).
struct TokenGrid {
  int t_frames = 0;
  int h_cells = 0;
  int w_cells = 0;
  int channels = 0;
  Tensor features;  // [T x H x W x C]

  int sites() const { return h_cells * w_cells; }
  int tokens() const { return t_frames * sites(); }
};

struct PatchEmbedParams {
  int patch_h = 4;
  int patch_w = 4;
  Tensor weight;  // [(ph*pw*ch) x C]
  Tensor bias;    // [C]
  // Optional extra per-token layers emulating a deeper backbone.
  std::vector<Tensor> mlp_w;  // [C x C]
  std::vector<Tensor> mlp_b;  // [C]
  Activation activation = Activation::gelu;
};

// Rearranges non-overlapping ph x pw x ch patches into rows of an
// [N x (ph*pw*ch)] matrix, row order matching the token order. Differentiable
// scatter on the way back (each pixel appears in exactly one row).
Tensor extract_patches(const Tensor& clip, int patch_h, int patch_w);

// Linear projection of each flattened patch to C channels.
TokenGrid patch_embed(const Tensor& clip, const PatchEmbedParams& p);

}  // namespace tag
