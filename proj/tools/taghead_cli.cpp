// Command-line harness for the taghead shared library. Every subcommand takes
// --config <path> and --out <dir>; artifacts land under the output directory.

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "taghead.h"

namespace {

struct SessionDeleter {
  void operator()(tag_session* s) const { tag_session_close(s); }
};
using SessionPtr = std::unique_ptr<tag_session, SessionDeleter>;

int finish(const SessionPtr& session, tag_status status) {
  if (status == TAG_OK) {
    std::fputs(tag_session_summary(session.get()), stdout);
    return 0;
  }
  std::fprintf(stderr, "error (%s): %s\n", tag_status_name(status),
               session ? tag_session_error(session.get()) : "");
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"taghead: spatio-temporal graph head experiments"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::string checkpoint, split = "test", stage = "graph";
  std::vector<int> widths;
  bool inject_fault = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "run config JSON")->required();
    cmd->add_option("--out", out_dir, "output directory")->required();
  };

  CLI::App* cmd_train = app.add_subcommand("train", "train and keep the best-val checkpoint");
  add_common(cmd_train);

  CLI::App* cmd_eval = app.add_subcommand("eval", "evaluate a checkpoint on one split");
  add_common(cmd_eval);
  cmd_eval->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  cmd_eval->add_option("--split", split, "train, val or test (default test)");

  CLI::App* cmd_ablate = app.add_subcommand("ablate", "run the five-row ablation table");
  add_common(cmd_ablate);

  CLI::App* cmd_sweep = app.add_subcommand("sweep-ffn", "train across FFN widths");
  add_common(cmd_sweep);
  cmd_sweep->add_option("--widths", widths, "FFN widths (default 256 512 1024 2048)");

  CLI::App* cmd_params = app.add_subcommand("params", "learnable parameter breakdown");
  add_common(cmd_params);

  CLI::App* cmd_gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient check");
  add_common(cmd_gradcheck);
  cmd_gradcheck->add_flag("--inject-fault", inject_fault,
                          "corrupt one backward rule (negative control)");

  CLI::App* cmd_bench = app.add_subcommand("bench", "dense vs structured propagation benchmark");
  add_common(cmd_bench);

  CLI::App* cmd_dump = app.add_subcommand("dump-features", "pooled per-clip features as CSV");
  add_common(cmd_dump);
  cmd_dump->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  cmd_dump->add_option("--split", split, "train, val or test (default test)");
  cmd_dump->add_option("--stage", stage, "backbone, encoder or graph (default graph)");

  CLI::App* cmd_gen = app.add_subcommand("gen-data", "generate and persist the synthetic dataset");
  add_common(cmd_gen);

  CLI11_PARSE(app, argc, argv);

  tag_session* raw = nullptr;
  tag_status status = tag_session_open(config_path.c_str(), out_dir.c_str(), &raw);
  SessionPtr session(raw);
  if (status != TAG_OK) {
    std::fprintf(stderr, "error (%s): cannot open session for %s\n", tag_status_name(status),
                 config_path.c_str());
    return 1;
  }

  if (cmd_train->parsed()) return finish(session, tag_train(session.get()));
  if (cmd_eval->parsed())
    return finish(session, tag_eval(session.get(), checkpoint.c_str(), split.c_str()));
  if (cmd_ablate->parsed()) return finish(session, tag_ablate(session.get()));
  if (cmd_sweep->parsed())
    return finish(session, tag_sweep_ffn(session.get(), widths.empty() ? nullptr : widths.data(),
                                         static_cast<int>(widths.size())));
  if (cmd_params->parsed()) return finish(session, tag_param_report(session.get()));
  if (cmd_gradcheck->parsed()) {
    double max_err = 0.0;
    tag_status s = tag_gradcheck(session.get(), inject_fault ? 1 : 0, &max_err);
    int rc = finish(session, s);
    if (rc != 0) return rc;
    return max_err < 1e-5 ? 0 : 2;  // nonzero when the check fails
  }
  if (cmd_bench->parsed()) return finish(session, tag_bench(session.get()));
  if (cmd_dump->parsed())
    return finish(session, tag_dump_features(session.get(), checkpoint.c_str(), split.c_str(),
                                             stage.c_str()));
  if (cmd_gen->parsed()) return finish(session, tag_gen_data(session.get()));
  return 1;
}
