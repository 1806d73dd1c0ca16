#include "backbone.hpp"

#include "ops.hpp"

namespace tag {

Tensor extract_patches(const Tensor& clip, int patch_h, int patch_w) {
  if (clip.rank() != 4) throw ShapeError("extract_patches: clip must be [T x Hpx x Wpx x ch]");
  int t_n = clip.dim(0), h_px = clip.dim(1), w_px = clip.dim(2), ch = clip.dim(3);
  if (patch_h < 1 || patch_w < 1 || h_px % patch_h != 0 || w_px % patch_w != 0)
    throw ShapeError("extract_patches: resolution " + std::to_string(h_px) + "x" +
                     std::to_string(w_px) + " not divisible by patch " + std::to_string(patch_h) +
                     "x" + std::to_string(patch_w));
  int h_cells = h_px / patch_h, w_cells = w_px / patch_w;
  int rows = t_n * h_cells * w_cells;
  int row_len = patch_h * patch_w * ch;
  Tensor out = Tensor::uninitialized({rows, row_len});
  const double* pc = clip.data();
  double* po = out.data();
  std::size_t row = 0;
  for (int t = 0; t < t_n; ++t)
    for (int gy = 0; gy < h_cells; ++gy)
      for (int gx = 0; gx < w_cells; ++gx, ++row) {
        double* dst = po + row * row_len;
        for (int dy = 0; dy < patch_h; ++dy)
          for (int dx = 0; dx < patch_w; ++dx)
            for (int c = 0; c < ch; ++c)
              *dst++ = pc[((static_cast<std::size_t>(t) * h_px + gy * patch_h + dy) * w_px +
                           gx * patch_w + dx) * ch + c];
      }
  if (active_tape() && clip.requires_grad()) {
    out.set_requires_grad(true);
    active_tape()->record([ci = clip.impl(), oi = out.impl(), t_n, h_px, w_px, ch, patch_h, patch_w,
                           h_cells, w_cells, row_len] {
      if (!oi->grad) return;
      const auto& go = *oi->grad;
      // Non-overlapping patches cover every pixel exactly once.
      double* gc;
      bool assign = ci->grad_target(&gc);
      std::size_t row = 0;
      for (int t = 0; t < t_n; ++t)
        for (int gy = 0; gy < h_cells; ++gy)
          for (int gx = 0; gx < w_cells; ++gx, ++row) {
            const double* src = go.data() + row * row_len;
            for (int dy = 0; dy < patch_h; ++dy)
              for (int dx = 0; dx < patch_w; ++dx)
                for (int c = 0; c < ch; ++c) {
                  std::size_t idx = ((static_cast<std::size_t>(t) * h_px + gy * patch_h + dy) * w_px +
                                     gx * patch_w + dx) * ch + c;
                  if (assign)
                    gc[idx] = *src++;
                  else
                    gc[idx] += *src++;
                }
          }
    });
  }
  return out;
}

TokenGrid patch_embed(const Tensor& clip, const PatchEmbedParams& p) {
  Tensor rows = extract_patches(clip, p.patch_h, p.patch_w);
  if (p.weight.rank() != 2 || p.weight.dim(0) != rows.dim(1))
    throw ShapeError("patch_embed: weight " + shape_str(p.weight.shape()) +
                     " does not match flattened patch length " + std::to_string(rows.dim(1)));
  Tensor feats = add_rowvec(matmul(rows, p.weight), p.bias);
  for (std::size_t i = 0; i < p.mlp_w.size(); ++i)
    feats = apply_activation(add_rowvec(matmul(feats, p.mlp_w[i]), p.mlp_b[i]), p.activation);
  TokenGrid grid;
  grid.t_frames = clip.dim(0);
  grid.h_cells = clip.dim(1) / p.patch_h;
  grid.w_cells = clip.dim(2) / p.patch_w;
  grid.channels = p.weight.dim(1);
  grid.features = reshape(feats, {grid.t_frames, grid.h_cells, grid.w_cells, grid.channels});
  return grid;
}

}  // namespace tag
