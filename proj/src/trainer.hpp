#pragma once

#include <string>

#include "config.hpp"
#include "model.hpp"
#include "optim.hpp"
#include "synth.hpp"

namespace tag {

struct DataBundle {
  Dataset data;
  SynthTaskConfig task;  // shape/class metadata, also for loaded datasets
};

// Generates the dataset inline or loads the configured directory.
DataBundle resolve_data(const RunConfig& cfg);

// Deterministic single-view evaluation over one split (no tape, no updates).
EvalReport evaluate_split(Model& model, const std::vector<LabeledClip>& clips, int num_classes);

struct TrainOutcome {
  std::string run_id;
  std::string metrics_path;
  std::string checkpoint_path;
  int best_epoch = -1;
  double best_val_top1 = 0.0;
  double final_val_top1 = 0.0;
  double seconds = 0.0;
};

// Minibatch cross-entropy training with Adam and an epoch-level cosine
// schedule. Logs one train and one val row per epoch, keeps the best-val
// checkpoint, and copies the resolved config into the run directory.
// Deterministic for a fixed config and seed.
TrainOutcome train_model(const RunConfig& cfg, const DataBundle& bundle, const std::string& out_dir);

}  // namespace tag
