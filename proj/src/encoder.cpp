#include "encoder.hpp"

#include <cmath>

namespace tag {

Tensor apply_activation(const Tensor& x, Activation act) {
  return act == Activation::gelu ? gelu(x) : relu(x);
}

void EncoderConfig::validate() const {
  if (layers < 0) throw ConfigError("encoder: layers must be >= 0");
  if (heads < 1) throw ConfigError("encoder: heads must be >= 1");
  if (model_dim < 1) throw ConfigError("encoder: model_dim must be >= 1");
  if (model_dim % heads != 0)
    throw ConfigError("encoder: model_dim " + std::to_string(model_dim) +
                      " not divisible by heads " + std::to_string(heads));
  if (ffn_dim < 1) throw ConfigError("encoder: ffn_dim must be >= 1");
  if (dropout != 0.0) throw ConfigError("encoder: dropout > 0 is not supported (hook defaults to 0)");
}

namespace {

Tensor attention_heads(const EncoderLayerParams& p, const std::vector<Tensor>& q_heads,
                       const std::vector<Tensor>& k_heads, const std::vector<Tensor>& v_heads) {
  int d_h = q_heads[0].dim(1);
  double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(d_h));
  std::vector<Tensor> contexts;
  contexts.reserve(q_heads.size());
  for (std::size_t h = 0; h < q_heads.size(); ++h) {
    Tensor scores = scale(matmul_nt(q_heads[h], k_heads[h]), inv_sqrt_dh);
    Tensor attn = softmax_lastdim(scores);
    contexts.push_back(matmul(attn, v_heads[h]));
  }
  return matmul(concat_cols(contexts), p.wo);
}

}  // namespace

Tensor multi_head_attention(const Tensor& tokens, const EncoderLayerParams& p) {
  if (tokens.rank() != 2) throw ShapeError("mha: tokens must be [N x C]");
  std::vector<Tensor> q, k, v;
  q.reserve(p.wq.size());
  k.reserve(p.wq.size());
  v.reserve(p.wq.size());
  for (std::size_t h = 0; h < p.wq.size(); ++h) {
    q.push_back(matmul(tokens, p.wq[h]));
    k.push_back(matmul(tokens, p.wk[h]));
    v.push_back(matmul(tokens, p.wv[h]));
  }
  return attention_heads(p, q, k, v);
}

Tensor multi_head_attention_fused(const Tensor& tokens, const EncoderLayerParams& p) {
  if (tokens.rank() != 2) throw ShapeError("mha: tokens must be [N x C]");
  Tensor q_full = matmul(tokens, concat_cols(p.wq));
  Tensor k_full = matmul(tokens, concat_cols(p.wk));
  Tensor v_full = matmul(tokens, concat_cols(p.wv));
  int d_h = p.wq[0].dim(1);
  std::vector<Tensor> q, k, v;
  for (std::size_t h = 0; h < p.wq.size(); ++h) {
    int off = static_cast<int>(h) * d_h;
    q.push_back(slice_cols(q_full, off, d_h));
    k.push_back(slice_cols(k_full, off, d_h));
    v.push_back(slice_cols(v_full, off, d_h));
  }
  return attention_heads(p, q, k, v);
}

Tensor encoder_layer(const Tensor& tokens, const EncoderLayerParams& p, Activation act) {
  Tensor attn = multi_head_attention(layer_norm(tokens, p.ln1_gain, p.ln1_bias, kLayerNormEps), p);
  Tensor u = add(tokens, attn);
  Tensor h = layer_norm(u, p.ln2_gain, p.ln2_bias, kLayerNormEps);
  h = apply_activation(add_rowvec(matmul(h, p.mlp_w1), p.mlp_b1), act);
  h = add_rowvec(matmul(h, p.mlp_w2), p.mlp_b2);
  return add(u, h);
}

Tensor encode(const Tensor& grid, const Tensor* pe, const std::vector<EncoderLayerParams>& layers,
              Activation act) {
  if (grid.rank() != 4) throw ShapeError("encode: grid must be [T x H x W x C]");
  Shape grid_shape = grid.shape();
  int n = grid.dim(0) * grid.dim(1) * grid.dim(2);
  int c = grid.dim(3);
  if (layers.empty() && pe == nullptr) return grid;
  Tensor flat = reshape(grid, {n, c});
  if (pe != nullptr) {
    if (pe->size() != flat.size())
      throw ShapeError("encode: positional table " + shape_str(pe->shape()) +
                       " does not match token grid " + shape_str(grid_shape));
    flat = add(flat, reshape(*pe, {n, c}));
  }
  for (const auto& layer : layers) flat = encoder_layer(flat, layer, act);
  return reshape(flat, grid_shape);
}

}  // namespace tag
