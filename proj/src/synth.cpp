#include "synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "config.hpp"
#include "json.hpp"

namespace tag {

namespace {

// Segment geometry relative to min(H, W); one-sided so a half-turn changes
// the image, and anti-aliased over ~1px so sub-pixel rotations register.
constexpr double kSegmentLenFrac = 0.38;
constexpr double kSegmentWidthFrac = 0.09;
constexpr double kAntialiasPx = 1.0;

double coverage_step(double signed_dist) {
  double v = signed_dist / kAntialiasPx + 0.5;
  return std::clamp(v, 0.0, 1.0);
}

}  // namespace

void SynthTaskConfig::validate() const {
  if (num_classes < 1) throw ConfigError("synth: num_classes must be >= 1");
  if (static_cast<int>(rotation_extents.size()) != num_classes)
    throw ConfigError("synth: rotation_extents must list one extent per class");
  for (std::size_t i = 0; i < rotation_extents.size(); ++i)
    for (std::size_t j = i + 1; j < rotation_extents.size(); ++j)
      if (rotation_extents[i] == rotation_extents[j])
        throw ConfigError("synth: rotation extents must be pairwise distinct");
  if (t_frames < 1) throw ConfigError("synth: t_frames must be >= 1");
  if (height_px < 4 || width_px < 4) throw ConfigError("synth: resolution must be at least 4x4");
  if (channels < 1) throw ConfigError("synth: channels must be >= 1");
  if (noise_sigma < 0) throw ConfigError("synth: noise_sigma must be >= 0");
  if (center_jitter_px < 0 || phase_jitter_turns < 0) throw ConfigError("synth: jitter must be >= 0");
  if (train_per_class < 0 || val_per_class < 0 || test_per_class < 0)
    throw ConfigError("synth: split sizes must be >= 0");
  if (long_tail_ratio < 0 || long_tail_ratio > 1)
    throw ConfigError("synth: long_tail_ratio must lie in [0, 1]");
}

LabeledClip generate_clip(const SynthTaskConfig& cfg, int class_id, Rng& rng) {
  cfg.validate();
  if (class_id < 0 || class_id >= cfg.num_classes)
    throw std::invalid_argument("generate_clip: class " + std::to_string(class_id) + " out of range");
  const int t_n = cfg.t_frames, h = cfg.height_px, w = cfg.width_px, ch = cfg.channels;
  const double side = static_cast<double>(std::min(h, w));
  const double seg_len = kSegmentLenFrac * side;
  const double seg_half_width = 0.5 * kSegmentWidthFrac * side;

  LabeledClip out;
  out.label = class_id;
  out.meta.extent_turns = cfg.rotation_extents[static_cast<std::size_t>(class_id)];
  out.meta.center_x = 0.5 * w + rng.uniform(-cfg.center_jitter_px, cfg.center_jitter_px);
  out.meta.center_y = 0.5 * h + rng.uniform(-cfg.center_jitter_px, cfg.center_jitter_px);
  out.meta.phase0_turns = cfg.phase_jitter_turns * rng.uniform();

  out.clip = Tensor({t_n, h, w, ch});
  double* px = out.clip.data();
  for (int t = 0; t < t_n; ++t) {
    double frac = t_n > 1 ? static_cast<double>(t) / static_cast<double>(t_n - 1) : 0.0;
    double theta = 2.0 * M_PI * (out.meta.phase0_turns + out.meta.extent_turns * frac);
    double ct = std::cos(theta), st = std::sin(theta);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double dx = (x + 0.5) - out.meta.center_x;
        double dy = (y + 0.5) - out.meta.center_y;
        double u = ct * dx + st * dy;   // along the segment
        double v = -st * dx + ct * dy;  // across it
        double value = coverage_step(u) * coverage_step(seg_len - u) *
                       coverage_step(seg_half_width - std::abs(v));
        for (int c = 0; c < ch; ++c)
          px[((static_cast<std::size_t>(t) * h + y) * w + x) * ch + c] = value;
      }
    }
  }
  if (cfg.noise_sigma > 0.0)
    for (std::size_t i = 0; i < out.clip.size(); ++i) px[i] += rng.normal(0.0, cfg.noise_sigma);
  return out;
}

std::vector<int> class_counts(int per_class, double long_tail_ratio, int num_classes) {
  std::vector<int> counts(static_cast<std::size_t>(num_classes), per_class);
  if (long_tail_ratio > 0.0 && long_tail_ratio < 1.0) {
    for (int c = 0; c < num_classes; ++c) {
      double n = per_class * std::pow(long_tail_ratio, static_cast<double>(c));
      counts[static_cast<std::size_t>(c)] = std::max(1, static_cast<int>(std::llround(n)));
    }
  }
  return counts;
}

namespace {

std::vector<LabeledClip> generate_split(const SynthTaskConfig& cfg, const Rng& split_rng,
                                        int per_class) {
  std::vector<LabeledClip> clips;
  std::vector<int> counts = class_counts(per_class, cfg.long_tail_ratio, cfg.num_classes);
  for (int c = 0; c < cfg.num_classes; ++c) {
    Rng class_rng = split_rng.fork("class" + std::to_string(c));
    for (int i = 0; i < counts[static_cast<std::size_t>(c)]; ++i) {
      Rng clip_rng = class_rng.fork(static_cast<std::uint64_t>(i));
      clips.push_back(generate_clip(cfg, c, clip_rng));
    }
  }
  return clips;
}

}  // namespace

Dataset generate_dataset(const SynthTaskConfig& cfg) {
  cfg.validate();
  Rng root = Rng(cfg.seed).fork("data");
  Dataset data;
  data.train = generate_split(cfg, root.fork("train"), cfg.train_per_class);
  data.val = generate_split(cfg, root.fork("val"), cfg.val_per_class);
  data.test = generate_split(cfg, root.fork("test"), cfg.test_per_class);
  return data;
}

namespace {

nlohmann::json meta_json(const LabeledClip& clip, const char* split) {
  return {{"split", split},
          {"extent_turns", clip.meta.extent_turns},
          {"phase0_turns", clip.meta.phase0_turns},
          {"center_x", clip.meta.center_x},
          {"center_y", clip.meta.center_y}};
}

void write_clip_file(const std::filesystem::path& path, const Tensor& clip) {
  std::vector<float> buf(clip.size());
  const double* src = clip.data();
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = static_cast<float>(src[i]);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path.string());
  os.write(reinterpret_cast<const char*>(buf.data()),
           static_cast<std::streamsize>(buf.size() * sizeof(float)));
}

Tensor read_clip_file(const std::filesystem::path& path, const SynthTaskConfig& cfg) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot read " + path.string());
  std::size_t n = static_cast<std::size_t>(cfg.t_frames) * cfg.height_px * cfg.width_px * cfg.channels;
  std::vector<float> buf(n);
  is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n * sizeof(float)));
  if (static_cast<std::size_t>(is.gcount()) != n * sizeof(float))
    throw IoError("clip file " + path.string() + " has wrong size");
  Tensor clip({cfg.t_frames, cfg.height_px, cfg.width_px, cfg.channels});
  double* dst = clip.data();
  for (std::size_t i = 0; i < n; ++i) dst[i] = static_cast<double>(buf[i]);
  return clip;
}

}  // namespace

void save_dataset(const Dataset& data, const SynthTaskConfig& cfg, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "clips");
  nlohmann::json items = nlohmann::json::array();
  int index = 0;
  auto dump_split = [&](const std::vector<LabeledClip>& clips, const char* split) {
    for (const auto& clip : clips) {
      char name[32];
      std::snprintf(name, sizeof(name), "clips/clip_%06d.bin", index++);
      write_clip_file(fs::path(dir) / name, clip.clip);
      items.push_back({{"file", name}, {"label", clip.label}, {"meta", meta_json(clip, split)}});
    }
  };
  dump_split(data.train, "train");
  dump_split(data.val, "val");
  dump_split(data.test, "test");
  nlohmann::json index_json = {
      {"version", 1}, {"config", synth_config_to_json(cfg)}, {"items", items}};
  std::ofstream os(fs::path(dir) / "index.json");
  if (!os) throw IoError("cannot write dataset index in " + dir);
  os << index_json.dump(2) << "\n";
}

Dataset load_dataset(const std::string& dir, SynthTaskConfig* cfg_out) {
  namespace fs = std::filesystem;
  std::ifstream is(fs::path(dir) / "index.json");
  if (!is) throw IoError("dataset index not found in " + dir);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("dataset index is not valid JSON: ") + e.what());
  }
  if (!j.contains("version") || j["version"] != 1)
    throw ConfigError("dataset index has unsupported version");
  SynthTaskConfig cfg = synth_config_from_json(j.at("config"));
  cfg.validate();
  if (cfg_out) *cfg_out = cfg;
  Dataset data;
  for (const auto& item : j.at("items")) {
    LabeledClip clip;
    clip.label = item.at("label").get<int>();
    if (clip.label < 0 || clip.label >= cfg.num_classes)
      throw ConfigError("dataset item label out of range");
    const auto& meta = item.at("meta");
    clip.meta.extent_turns = meta.at("extent_turns").get<double>();
    clip.meta.phase0_turns = meta.at("phase0_turns").get<double>();
    clip.meta.center_x = meta.at("center_x").get<double>();
    clip.meta.center_y = meta.at("center_y").get<double>();
    clip.clip = read_clip_file(fs::path(dir) / item.at("file").get<std::string>(), cfg);
    std::string split = meta.at("split").get<std::string>();
    if (split == "train")
      data.train.push_back(std::move(clip));
    else if (split == "val")
      data.val.push_back(std::move(clip));
    else if (split == "test")
      data.test.push_back(std::move(clip));
    else
      throw ConfigError("dataset item has unknown split '" + split + "'");
  }
  return data;
}

}  // namespace tag
