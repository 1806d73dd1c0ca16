#pragma once

#include <string>
#include <vector>

#include "backbone.hpp"
#include "config.hpp"
#include "head.hpp"
#include "params.hpp"

namespace tag {

struct InputSpec {
  int t_frames = 0;
  int height_px = 0;
  int width_px = 0;
  int channels = 0;
  int num_classes = 0;
};

struct ParamReport {
  // Group order: backbone, positional_encoding, encoder, propagation, classifier.
  std::vector<std::pair<std::string, std::size_t>> groups;
  std::size_t total = 0;

  std::size_t group(const std::string& name) const;
  std::string to_text() const;
};

// Pooled C-vectors tapped after each stage, for feature dumps and analysis.
struct StageFeatures {
  std::vector<double> backbone;
  std::vector<double> encoder;
  std::vector<double> graph;
};

struct ForwardOut {
  Tensor logits;
  StageFeatures stages;
};

// The full pipeline: patch backbone -> positional encoding -> encoder ->
// teleported graph propagation -> pooled linear classifier.
class Model {
 public:
  Model(const ModelConfig& cfg, const InputSpec& input);

  void init_params(std::uint64_t seed);

  ForwardOut forward(const Tensor& clip, bool want_stage_features = false);

  // Stage entry points (also used by ablation soundness tests).
  TokenGrid backbone_grid(const Tensor& clip);
  Tensor encode_grid(const TokenGrid& grid);    // returns [N x C] tokens
  Tensor propagate(const Tensor& tokens);       // identity when the stage is off
  ClassifierOut classify(const Tensor& tokens);

  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  const ModelConfig& config() const { return cfg_; }
  const InputSpec& input() const { return input_; }
  const StGraph& graph() const { return graph_; }
  int grid_h() const { return grid_h_; }
  int grid_w() const { return grid_w_; }
  int tokens() const { return input_.t_frames * grid_h_ * grid_w_; }

  ParamReport param_report() const;

  nlohmann::json meta_json() const;
  static Model from_meta(const nlohmann::json& meta);

 private:
  ModelConfig cfg_;
  InputSpec input_;
  int grid_h_ = 0, grid_w_ = 0;
  ParamStore params_;
  StGraph graph_;

  // Views into the store; Tensor copies share storage with it.
  PatchEmbedParams patch_;
  Tensor pos_table_;  // [T x P x C], undefined when disabled
  std::vector<EncoderLayerParams> layers_;
  Tensor w_cls_, b_cls_;

  void register_params();
};

InputSpec input_spec_from_synth(const SynthTaskConfig& cfg);

}  // namespace tag
