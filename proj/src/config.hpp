#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "encoder.hpp"
#include "graph.hpp"
#include "synth.hpp"

#include "json.hpp"

namespace tag {

struct DataConfig {
  std::optional<SynthTaskConfig> synth;  // generate on the fly
  std::optional<std::string> path;       // or load a persisted dataset directory
};

struct ModelConfig {
  int patch_h = 4;
  int patch_w = 4;
  int embed_dim = 64;
  int backbone_depth = 0;  // extra per-token layers, 0-2
  bool positional_encoding = true;
  EncoderConfig encoder;
  PropagationConfig propagation;
};

struct TrainConfig {
  int epochs = 30;
  int batch_size = 8;
  double lr_max = 2e-3;
  double lr_min = 1e-4;
};

// Table-4 style switches. TE covers the positional table and the encoder
// layers together; IF-FC/TAT select the graph edge families.
struct AblationSwitches {
  bool use_te = true;
  bool use_if_fc = true;
  bool use_tat = true;
};

struct RunConfig {
  int version = 1;
  std::uint64_t seed = 1;
  std::vector<std::uint64_t> seeds;  // multi-seed commands; empty -> {seed}
  DataConfig data;
  ModelConfig model;
  TrainConfig train;
  AblationSwitches ablation;

  std::vector<std::uint64_t> effective_seeds() const;
  void validate() const;
};

// Folds the ablation switches into the model description.
ModelConfig apply_ablation(ModelConfig m, const AblationSwitches& ab);

// Parsers are strict: unknown keys raise ConfigError so a typo in an ablation
// switch can never silently run the wrong experiment. Missing keys fall back
// to the defaults above.
RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json run_config_to_json(const RunConfig& cfg);
RunConfig load_run_config(const std::string& path);

SynthTaskConfig synth_config_from_json(const nlohmann::json& j);
nlohmann::json synth_config_to_json(const SynthTaskConfig& cfg);

// Smallest pairwise distance between rotation extents (task difficulty).
double min_extent_gap(const SynthTaskConfig& cfg);

}  // namespace tag
