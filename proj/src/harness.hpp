#pragma once

#include <string>
#include <vector>

#include "config.hpp"
#include "gradcheck.hpp"
#include "trainer.hpp"

namespace tag {

struct CommandOutput {
  std::string summary;  // human-readable block printed by the CLI
};

// The five Table-4 style configurations, in order:
// B, B+TE, B+TE+IF-FC, B+TE+TAT, FULL.
extern const char* const kAblationRows[5];
RunConfig ablation_row_config(const RunConfig& base, int row, std::uint64_t seed);

CommandOutput cmd_gen_data(const RunConfig& cfg, const std::string& out_dir);
CommandOutput cmd_train(const RunConfig& cfg, const std::string& out_dir);
CommandOutput cmd_eval(const RunConfig& cfg, const std::string& out_dir,
                       const std::string& checkpoint, const std::string& split);
CommandOutput cmd_ablate(const RunConfig& cfg, const std::string& out_dir);
CommandOutput cmd_sweep_ffn(const RunConfig& cfg, const std::string& out_dir,
                            const std::vector<int>& widths);
CommandOutput cmd_param_report(const RunConfig& cfg, const std::string& out_dir);
CommandOutput cmd_gradcheck(const RunConfig& cfg, const std::string& out_dir, bool inject_fault,
                            double* max_rel_err_out);
CommandOutput cmd_bench(const RunConfig& cfg, const std::string& out_dir);
CommandOutput cmd_dump_features(const RunConfig& cfg, const std::string& out_dir,
                                const std::string& checkpoint, const std::string& split,
                                const std::string& stage);

// Shared by cmd_gradcheck and the gradient acceptance suite: the full tiny
// pipeline (T=2, 2x2 token grid, C=8, 3 classes) under the given switches.
GradCheckReport full_pipeline_gradcheck(const AblationSwitches& ablation, Activation activation);

// Loads a checkpoint, rebuilds its model, and restores the weights.
Model model_from_checkpoint(const std::string& path, nlohmann::json* meta_out = nullptr);

}  // namespace tag
