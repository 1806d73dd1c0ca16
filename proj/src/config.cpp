#include "config.hpp"

#include <cmath>
#include <fstream>
#include <limits>

namespace tag {

namespace {

void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                const char* context) {
  if (!j.is_object()) throw ConfigError(std::string(context) + ": expected a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok) throw ConfigError(std::string(context) + ": unknown key '" + it.key() + "'");
  }
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) {
    try {
      out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
  }
}

Activation activation_from_string(const std::string& s) {
  if (s == "gelu") return Activation::gelu;
  if (s == "relu") return Activation::relu;
  throw ConfigError("encoder activation must be 'gelu' or 'relu', got '" + s + "'");
}

const char* activation_to_string(Activation a) { return a == Activation::gelu ? "gelu" : "relu"; }

}  // namespace

std::vector<std::uint64_t> RunConfig::effective_seeds() const {
  return seeds.empty() ? std::vector<std::uint64_t>{seed} : seeds;
}

void RunConfig::validate() const {
  if (version != 1) throw ConfigError("config version " + std::to_string(version) + " is not supported");
  if (data.synth.has_value() == data.path.has_value())
    throw ConfigError("data: exactly one of 'synth' or 'path' must be given");
  if (data.synth) data.synth->validate();
  if (model.patch_h < 1 || model.patch_w < 1) throw ConfigError("model: patch extents must be >= 1");
  if (model.embed_dim < 1) throw ConfigError("model: embed_dim must be >= 1");
  if (model.backbone_depth < 0 || model.backbone_depth > 2)
    throw ConfigError("model: backbone_depth must lie in [0, 2]");
  model.encoder.validate();
  model.propagation.validate();
  if (train.epochs < 0) throw ConfigError("train: epochs must be >= 0");
  if (train.batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (train.lr_max < 0 || train.lr_min < 0) throw ConfigError("train: learning rates must be >= 0");
}

ModelConfig apply_ablation(ModelConfig m, const AblationSwitches& ab) {
  if (!ab.use_te) {
    m.encoder.layers = 0;
    m.positional_encoding = false;
  }
  m.propagation.use_intra = m.propagation.use_intra && ab.use_if_fc;
  m.propagation.use_temp = m.propagation.use_temp && ab.use_tat;
  return m;
}

SynthTaskConfig synth_config_from_json(const nlohmann::json& j) {
  check_keys(j,
             {"num_classes", "t_frames", "height_px", "width_px", "channels", "rotation_extents",
              "noise_sigma", "center_jitter_px", "phase_jitter_turns", "train_per_class",
              "val_per_class", "test_per_class", "long_tail_ratio", "seed"},
             "data.synth");
  SynthTaskConfig cfg;
  read(j, "num_classes", cfg.num_classes);
  read(j, "t_frames", cfg.t_frames);
  read(j, "height_px", cfg.height_px);
  read(j, "width_px", cfg.width_px);
  read(j, "channels", cfg.channels);
  read(j, "rotation_extents", cfg.rotation_extents);
  read(j, "noise_sigma", cfg.noise_sigma);
  read(j, "center_jitter_px", cfg.center_jitter_px);
  read(j, "phase_jitter_turns", cfg.phase_jitter_turns);
  read(j, "train_per_class", cfg.train_per_class);
  read(j, "val_per_class", cfg.val_per_class);
  read(j, "test_per_class", cfg.test_per_class);
  read(j, "long_tail_ratio", cfg.long_tail_ratio);
  read(j, "seed", cfg.seed);
  return cfg;
}

nlohmann::json synth_config_to_json(const SynthTaskConfig& cfg) {
  return {{"num_classes", cfg.num_classes},
          {"t_frames", cfg.t_frames},
          {"height_px", cfg.height_px},
          {"width_px", cfg.width_px},
          {"channels", cfg.channels},
          {"rotation_extents", cfg.rotation_extents},
          {"noise_sigma", cfg.noise_sigma},
          {"center_jitter_px", cfg.center_jitter_px},
          {"phase_jitter_turns", cfg.phase_jitter_turns},
          {"train_per_class", cfg.train_per_class},
          {"val_per_class", cfg.val_per_class},
          {"test_per_class", cfg.test_per_class},
          {"long_tail_ratio", cfg.long_tail_ratio},
          {"seed", cfg.seed}};
}

double min_extent_gap(const SynthTaskConfig& cfg) {
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cfg.rotation_extents.size(); ++i)
    for (std::size_t j = i + 1; j < cfg.rotation_extents.size(); ++j)
      gap = std::min(gap, std::abs(cfg.rotation_extents[i] - cfg.rotation_extents[j]));
  return gap;
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  check_keys(j, {"version", "seed", "seeds", "data", "model", "train", "ablation"}, "config");
  RunConfig cfg;
  read(j, "version", cfg.version);
  read(j, "seed", cfg.seed);
  read(j, "seeds", cfg.seeds);
  if (j.contains("data")) {
    const auto& d = j.at("data");
    check_keys(d, {"synth", "path"}, "data");
    if (d.contains("synth")) cfg.data.synth = synth_config_from_json(d.at("synth"));
    if (d.contains("path")) cfg.data.path = d.at("path").get<std::string>();
  } else {
    cfg.data.synth = SynthTaskConfig{};
  }
  if (j.contains("model")) {
    const auto& m = j.at("model");
    check_keys(m, {"patch", "embed_dim", "backbone_depth", "positional_encoding", "encoder",
                   "propagation"},
               "model");
    if (m.contains("patch")) {
      auto patch = m.at("patch").get<std::vector<int>>();
      if (patch.size() != 2) throw ConfigError("model.patch must be [ph, pw]");
      cfg.model.patch_h = patch[0];
      cfg.model.patch_w = patch[1];
    }
    read(m, "embed_dim", cfg.model.embed_dim);
    read(m, "backbone_depth", cfg.model.backbone_depth);
    read(m, "positional_encoding", cfg.model.positional_encoding);
    if (m.contains("encoder")) {
      const auto& e = m.at("encoder");
      check_keys(e, {"layers", "heads", "ffn_dim", "activation", "dropout"}, "model.encoder");
      read(e, "layers", cfg.model.encoder.layers);
      read(e, "heads", cfg.model.encoder.heads);
      read(e, "ffn_dim", cfg.model.encoder.ffn_dim);
      if (e.contains("activation"))
        cfg.model.encoder.activation = activation_from_string(e.at("activation").get<std::string>());
      read(e, "dropout", cfg.model.encoder.dropout);
    }
    if (m.contains("propagation")) {
      const auto& p = m.at("propagation");
      check_keys(p, {"alpha", "k_prop", "use_intra", "use_temp", "temporal_stride"},
                 "model.propagation");
      read(p, "alpha", cfg.model.propagation.alpha);
      read(p, "k_prop", cfg.model.propagation.k_prop);
      read(p, "use_intra", cfg.model.propagation.use_intra);
      read(p, "use_temp", cfg.model.propagation.use_temp);
      read(p, "temporal_stride", cfg.model.propagation.temporal_stride);
    }
  }
  cfg.model.encoder.model_dim = cfg.model.embed_dim;
  if (j.contains("train")) {
    const auto& t = j.at("train");
    check_keys(t, {"epochs", "batch_size", "lr_max", "lr_min"}, "train");
    read(t, "epochs", cfg.train.epochs);
    read(t, "batch_size", cfg.train.batch_size);
    read(t, "lr_max", cfg.train.lr_max);
    read(t, "lr_min", cfg.train.lr_min);
  }
  if (j.contains("ablation")) {
    const auto& a = j.at("ablation");
    check_keys(a, {"use_te", "use_if_fc", "use_tat"}, "ablation");
    read(a, "use_te", cfg.ablation.use_te);
    read(a, "use_if_fc", cfg.ablation.use_if_fc);
    read(a, "use_tat", cfg.ablation.use_tat);
  }
  cfg.validate();
  return cfg;
}

nlohmann::json run_config_to_json(const RunConfig& cfg) {
  nlohmann::json data;
  if (cfg.data.synth) data["synth"] = synth_config_to_json(*cfg.data.synth);
  if (cfg.data.path) data["path"] = *cfg.data.path;
  nlohmann::json j = {
      {"version", cfg.version},
      {"seed", cfg.seed},
      {"data", data},
      {"model",
       {{"patch", {cfg.model.patch_h, cfg.model.patch_w}},
        {"embed_dim", cfg.model.embed_dim},
        {"backbone_depth", cfg.model.backbone_depth},
        {"positional_encoding", cfg.model.positional_encoding},
        {"encoder",
         {{"layers", cfg.model.encoder.layers},
          {"heads", cfg.model.encoder.heads},
          {"ffn_dim", cfg.model.encoder.ffn_dim},
          {"activation", activation_to_string(cfg.model.encoder.activation)},
          {"dropout", cfg.model.encoder.dropout}}},
        {"propagation",
         {{"alpha", cfg.model.propagation.alpha},
          {"k_prop", cfg.model.propagation.k_prop},
          {"use_intra", cfg.model.propagation.use_intra},
          {"use_temp", cfg.model.propagation.use_temp},
          {"temporal_stride", cfg.model.propagation.temporal_stride}}}}},
      {"train",
       {{"epochs", cfg.train.epochs},
        {"batch_size", cfg.train.batch_size},
        {"lr_max", cfg.train.lr_max},
        {"lr_min", cfg.train.lr_min}}},
      {"ablation",
       {{"use_te", cfg.ablation.use_te},
        {"use_if_fc", cfg.ablation.use_if_fc},
        {"use_tat", cfg.ablation.use_tat}}}};
  if (!cfg.seeds.empty()) j["seeds"] = cfg.seeds;
  return j;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config file " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path + " is not valid JSON: " + e.what());
  }
  return run_config_from_json(j);
}

}  // namespace tag
