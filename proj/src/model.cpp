#include "model.hpp"

#include <sstream>

#include "ops.hpp"
#include "util.hpp"

namespace tag {

InputSpec input_spec_from_synth(const SynthTaskConfig& cfg) {
  return {cfg.t_frames, cfg.height_px, cfg.width_px, cfg.channels, cfg.num_classes};
}

std::size_t ParamReport::group(const std::string& name) const {
  for (const auto& [g, n] : groups)
    if (g == name) return n;
  throw StateError("param report has no group '" + name + "'");
}

std::string ParamReport::to_text() const {
  std::ostringstream os;
  for (const auto& [g, n] : groups) os << g << " " << n << "\n";
  os << "total " << total << "\n";
  return os.str();
}

Model::Model(const ModelConfig& cfg, const InputSpec& input) : cfg_(cfg), input_(input) {
  tune_allocator_once();
  cfg_.encoder.validate();
  cfg_.propagation.validate();
  if (input_.t_frames < 1 || input_.num_classes < 1)
    throw ConfigError("model: input needs at least one frame and one class");
  if (input_.height_px % cfg_.patch_h != 0 || input_.width_px % cfg_.patch_w != 0)
    throw ShapeError("model: resolution " + std::to_string(input_.height_px) + "x" +
                     std::to_string(input_.width_px) + " not divisible by patch " +
                     std::to_string(cfg_.patch_h) + "x" + std::to_string(cfg_.patch_w));
  grid_h_ = input_.height_px / cfg_.patch_h;
  grid_w_ = input_.width_px / cfg_.patch_w;
  graph_ = build_graph(input_.t_frames, grid_h_ * grid_w_, cfg_.propagation);
  register_params();
}

void Model::register_params() {
  const int c = cfg_.embed_dim;
  const int patch_len = cfg_.patch_h * cfg_.patch_w * input_.channels;
  patch_.patch_h = cfg_.patch_h;
  patch_.patch_w = cfg_.patch_w;
  patch_.activation = cfg_.encoder.activation;
  patch_.weight = params_.add("backbone.patch.weight", Tensor({patch_len, c}));
  patch_.bias = params_.add("backbone.patch.bias", Tensor({c}));
  for (int i = 0; i < cfg_.backbone_depth; ++i) {
    patch_.mlp_w.push_back(params_.add("backbone.mlp" + std::to_string(i) + ".weight", Tensor({c, c})));
    patch_.mlp_b.push_back(params_.add("backbone.mlp" + std::to_string(i) + ".bias", Tensor({c})));
  }
  if (cfg_.positional_encoding)
    pos_table_ = params_.add("pos.table", Tensor({input_.t_frames, grid_h_ * grid_w_, c}));
  const int d_h = cfg_.encoder.head_dim();
  for (int l = 0; l < cfg_.encoder.layers; ++l) {
    std::string base = "enc" + std::to_string(l) + ".";
    EncoderLayerParams layer;
    for (int h = 0; h < cfg_.encoder.heads; ++h) {
      std::string hb = base + "head" + std::to_string(h) + ".";
      layer.wq.push_back(params_.add(hb + "wq", Tensor({c, d_h})));
      layer.wk.push_back(params_.add(hb + "wk", Tensor({c, d_h})));
      layer.wv.push_back(params_.add(hb + "wv", Tensor({c, d_h})));
    }
    layer.wo = params_.add(base + "wo", Tensor({c, c}));
    layer.ln1_gain = params_.add(base + "ln1.gain", Tensor::full({c}, 1.0));
    layer.ln1_bias = params_.add(base + "ln1.bias", Tensor({c}));
    layer.mlp_w1 = params_.add(base + "mlp.w1", Tensor({c, cfg_.encoder.ffn_dim}));
    layer.mlp_b1 = params_.add(base + "mlp.b1", Tensor({cfg_.encoder.ffn_dim}));
    layer.mlp_w2 = params_.add(base + "mlp.w2", Tensor({cfg_.encoder.ffn_dim, c}));
    layer.mlp_b2 = params_.add(base + "mlp.b2", Tensor({c}));
    layer.ln2_gain = params_.add(base + "ln2.gain", Tensor::full({c}, 1.0));
    layer.ln2_bias = params_.add(base + "ln2.bias", Tensor({c}));
    layers_.push_back(std::move(layer));
  }
  w_cls_ = params_.add("cls.weight", Tensor({input_.num_classes, c}));
  b_cls_ = params_.add("cls.bias", Tensor({input_.num_classes}));
}

void Model::init_params(std::uint64_t seed) {
  Rng root = Rng(seed).fork("init");
  const int c = cfg_.embed_dim;
  const int patch_len = cfg_.patch_h * cfg_.patch_w * input_.channels;
  auto set = [&](Tensor& dst, Tensor src) { dst.values() = src.values(); };
  set(patch_.weight, init_uniform_fanin(root, "backbone.patch.weight", patch_.weight.shape(), patch_len));
  for (std::size_t i = 0; i < patch_.mlp_w.size(); ++i)
    set(patch_.mlp_w[i], init_uniform_fanin(root, "backbone.mlp" + std::to_string(i) + ".weight",
                                            patch_.mlp_w[i].shape(), c));
  if (pos_table_.defined())
    set(pos_table_, init_normal(root, "pos.table", pos_table_.shape(), 0.02));
  const int d_h = cfg_.encoder.head_dim();
  (void)d_h;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    std::string base = "enc" + std::to_string(l) + ".";
    auto& layer = layers_[l];
    for (std::size_t h = 0; h < layer.wq.size(); ++h) {
      std::string hb = base + "head" + std::to_string(h) + ".";
      set(layer.wq[h], init_uniform_fanin(root, hb + "wq", layer.wq[h].shape(), c));
      set(layer.wk[h], init_uniform_fanin(root, hb + "wk", layer.wk[h].shape(), c));
      set(layer.wv[h], init_uniform_fanin(root, hb + "wv", layer.wv[h].shape(), c));
    }
    set(layer.wo, init_uniform_fanin(root, base + "wo", layer.wo.shape(), c));
    set(layer.mlp_w1, init_uniform_fanin(root, base + "mlp.w1", layer.mlp_w1.shape(), c));
    set(layer.mlp_w2, init_uniform_fanin(root, base + "mlp.w2", layer.mlp_w2.shape(), cfg_.encoder.ffn_dim));
  }
  set(w_cls_, init_uniform_fanin(root, "cls.weight", w_cls_.shape(), c));
}

TokenGrid Model::backbone_grid(const Tensor& clip) {
  if (clip.rank() != 4 || clip.dim(0) != input_.t_frames || clip.dim(1) != input_.height_px ||
      clip.dim(2) != input_.width_px || clip.dim(3) != input_.channels)
    throw ShapeError("model: clip " + shape_str(clip.shape()) + " does not match the configured input");
  return patch_embed(clip, patch_);
}

Tensor Model::encode_grid(const TokenGrid& grid) {
  const Tensor* pe = pos_table_.defined() ? &pos_table_ : nullptr;
  Tensor encoded = encode(grid.features, pe, layers_, cfg_.encoder.activation);
  return reshape(encoded, {tokens(), cfg_.embed_dim});
}

Tensor Model::propagate(const Tensor& tokens_nc) {
  if (!cfg_.propagation.active()) return tokens_nc;
  return appnp_structured(tokens_nc, graph_, cfg_.propagation);
}

ClassifierOut Model::classify(const Tensor& tokens_nc) {
  return pool_and_classify(tokens_nc, w_cls_, b_cls_);
}

namespace {

std::vector<double> pooled_of(const Tensor& tokens_nc) {
  Tensor pooled = mean_rows(tokens_nc);
  return std::vector<double>(pooled.values().begin(), pooled.values().end());
}

}  // namespace

ForwardOut Model::forward(const Tensor& clip, bool want_stage_features) {
  ForwardOut out;
  TokenGrid grid = backbone_grid(clip);
  Tensor flat_backbone = reshape(grid.features, {tokens(), cfg_.embed_dim});
  if (want_stage_features) out.stages.backbone = pooled_of(flat_backbone);
  Tensor encoded = encode_grid(grid);
  if (want_stage_features) out.stages.encoder = pooled_of(encoded);
  Tensor refined = propagate(encoded);
  if (want_stage_features) out.stages.graph = pooled_of(refined);
  out.logits = classify(refined).logits;
  return out;
}

ParamReport Model::param_report() const {
  ParamReport r;
  r.groups = {
      {"backbone", params_.scalars_with_prefix("backbone.")},
      {"positional_encoding", params_.scalars_with_prefix("pos.")},
      {"encoder", params_.scalars_with_prefix("enc")},
      {"propagation", 0},  // teleported propagation is parameter-free
      {"classifier", params_.scalars_with_prefix("cls.")},
  };
  for (const auto& [g, n] : r.groups) r.total += n;
  if (r.total != params_.total_scalars())
    throw StateError("param report groups do not cover the store");
  return r;
}

nlohmann::json Model::meta_json() const {
  RunConfig carrier;  // reuse the model serializer for the nested block
  carrier.model = cfg_;
  nlohmann::json model_json = run_config_to_json(carrier)["model"];
  return {{"model", model_json},
          {"input",
           {{"t_frames", input_.t_frames},
            {"height_px", input_.height_px},
            {"width_px", input_.width_px},
            {"channels", input_.channels},
            {"num_classes", input_.num_classes}}}};
}

Model Model::from_meta(const nlohmann::json& meta) {
  if (!meta.contains("model") || !meta.contains("input"))
    throw ConfigError("checkpoint meta is missing the model description");
  nlohmann::json carrier = {{"model", meta.at("model")}};
  RunConfig cfg = run_config_from_json(carrier);
  const auto& in = meta.at("input");
  InputSpec spec{in.at("t_frames").get<int>(), in.at("height_px").get<int>(),
                 in.at("width_px").get<int>(), in.at("channels").get<int>(),
                 in.at("num_classes").get<int>()};
  return Model(cfg.model, spec);
}

}  // namespace tag
