#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rng.hpp"
#include "tensor.hpp"

namespace tag {

// Classes differ only by how far a bright segment rotates across the clip;
// everything else (position, starting phase, noise) is nuisance.
struct SynthTaskConfig {
  int num_classes = 4;
  int t_frames = 16;
  int height_px = 32;
  int width_px = 32;
  int channels = 1;
  std::vector<double> rotation_extents = {0.25, 0.5, 0.75, 1.0};  // turns per class
  double noise_sigma = 0.02;
  double center_jitter_px = 2.0;
  double phase_jitter_turns = 1.0;  // starting phase drawn from [0, this)
  int train_per_class = 50;
  int val_per_class = 16;
  int test_per_class = 25;
  double long_tail_ratio = 0.0;  // 0 = balanced; else geometric decay from the head class
  std::uint64_t seed = 1;

  void validate() const;
};

struct ClipMeta {
  double extent_turns = 0.0;
  double phase0_turns = 0.0;
  double center_x = 0.0;
  double center_y = 0.0;
};

struct LabeledClip {
  Tensor clip;  // [T x Hpx x Wpx x ch], values in [0,1] before noise
  int label = 0;
  ClipMeta meta;
};

struct Dataset {
  std::vector<LabeledClip> train, val, test;
};

// Renders a bright segment anchored at a jittered centre, rotating uniformly
// by rotation_extents[class_id] turns across the clip. Anti-aliased so
// sub-pixel rotation differences are expressible.
LabeledClip generate_clip(const SynthTaskConfig& cfg, int class_id, Rng& rng);

// Per-class sample counts for one split; geometric when ratio > 0.
std::vector<int> class_counts(int per_class, double long_tail_ratio, int num_classes);

// Splits draw disjoint nuisance parameters; same seed -> identical bytes.
Dataset generate_dataset(const SynthTaskConfig& cfg);

// Directory layout: index.json ({version, config, items}) plus one raw
// little-endian float32 file per clip.
void save_dataset(const Dataset& data, const SynthTaskConfig& cfg, const std::string& dir);
Dataset load_dataset(const std::string& dir, SynthTaskConfig* cfg_out = nullptr);

}  // namespace tag
