#pragma once

#include <vector>

#include "ops.hpp"
#include "tensor.hpp"

namespace tag {

inline constexpr double kLayerNormEps = 1e-5;

enum class Activation { gelu, relu };

Tensor apply_activation(const Tensor& x, Activation act);

struct EncoderConfig {
  int layers = 2;
  int heads = 4;
  int model_dim = 64;
  int ffn_dim = 128;
  Activation activation = Activation::gelu;
  double dropout = 0.0;  // hook; only 0 is supported

  int head_dim() const { return model_dim / heads; }
  void validate() const;
};

// One layer's tensors. Q/K/V are stored per head as [C x d_h]; evaluation may
// fuse them, and the two routes are tested for equivalence.
struct EncoderLayerParams {
  std::vector<Tensor> wq, wk, wv;  // per head, [C x d_h]
  Tensor wo;                       // [C x C]
  Tensor ln1_gain, ln1_bias;
  Tensor mlp_w1, mlp_b1, mlp_w2, mlp_b2;
  Tensor ln2_gain, ln2_bias;
};

// Global joint space-time attention over all N tokens.
// Per head: softmax(Q K^T / sqrt(d_h)) V; heads concatenated then W_o.
Tensor multi_head_attention(const Tensor& tokens, const EncoderLayerParams& p);

// Same computation with Q/K/V evaluated through concatenated [C x C] weights.
Tensor multi_head_attention_fused(const Tensor& tokens, const EncoderLayerParams& p);

// Pre-norm residual block pair:
//   U = Z + MHA(LN(Z)); Z' = U + MLP(LN(U)).
Tensor encoder_layer(const Tensor& tokens, const EncoderLayerParams& p, Activation act);

// Flatten [T x H x W x C] to the fixed token order n = t*P + (h*W + w), add
// the learnable positional table (same shape), run the layers, reshape back.
// pe may be null (disabled); zero layers with no pe is the identity.
Tensor encode(const Tensor& grid, const Tensor* pe, const std::vector<EncoderLayerParams>& layers,
              Activation act);

}  // namespace tag
