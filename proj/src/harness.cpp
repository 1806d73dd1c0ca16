#include "harness.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "bench.hpp"
#include "checkpoint.hpp"
#include "ops.hpp"
#include "util.hpp"

namespace tag {

const char* const kAblationRows[5] = {"B", "B+TE", "B+TE+IF-FC", "B+TE+TAT", "FULL"};

RunConfig ablation_row_config(const RunConfig& base, int row, std::uint64_t seed) {
  if (row < 0 || row >= 5) throw std::invalid_argument("ablation row index out of range");
  RunConfig cfg = base;
  cfg.seed = seed;
  cfg.seeds.clear();
  switch (row) {
    case 0: cfg.ablation = {false, false, false}; break;
    case 1: cfg.ablation = {true, false, false}; break;
    case 2: cfg.ablation = {true, true, false}; break;
    case 3: cfg.ablation = {true, false, true}; break;
    case 4: cfg.ablation = {true, true, true}; break;
  }
  return cfg;
}

Model model_from_checkpoint(const std::string& path, nlohmann::json* meta_out) {
  CheckpointData ckpt = load_checkpoint(path);
  Model model = Model::from_meta(ckpt.meta);
  restore_params(model.params(), ckpt);
  if (meta_out) *meta_out = ckpt.meta;
  return model;
}

namespace {

const std::vector<LabeledClip>& pick_split(const Dataset& data, const std::string& split) {
  if (split == "train") return data.train;
  if (split == "val") return data.val;
  if (split == "test") return data.test;
  throw std::invalid_argument("unknown split '" + split + "' (expected train, val or test)");
}

void check_model_matches_task(const Model& model, const SynthTaskConfig& task) {
  const InputSpec& in = model.input();
  if (in.t_frames != task.t_frames || in.height_px != task.height_px ||
      in.width_px != task.width_px || in.channels != task.channels ||
      in.num_classes != task.num_classes)
    throw ConfigError("checkpoint model does not match the configured data dimensions");
}

}  // namespace

CommandOutput cmd_gen_data(const RunConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  if (!cfg.data.synth) throw ConfigError("gen-data needs an inline data.synth block");
  ensure_dir(out_dir);
  Dataset data = generate_dataset(*cfg.data.synth);
  std::string dir = out_dir + "/dataset";
  save_dataset(data, *cfg.data.synth, dir);
  std::ostringstream os;
  os << "dataset written to " << dir << "\n";
  os << "train " << data.train.size() << ", val " << data.val.size() << ", test "
     << data.test.size() << " clips\n";
  os << "min rotation-extent gap " << fmt_g(min_extent_gap(*cfg.data.synth)) << " turns\n";
  return {os.str()};
}

CommandOutput cmd_train(const RunConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  DataBundle bundle = resolve_data(cfg);
  TrainOutcome outcome = train_model(cfg, bundle, out_dir);
  std::ostringstream os;
  os << "run_id " << outcome.run_id << "\n";
  os << "best_epoch " << outcome.best_epoch << "\n";
  os << "best_val_top1 " << fmt_g(outcome.best_val_top1) << "\n";
  os << "checkpoint " << outcome.checkpoint_path << "\n";
  os << "metrics " << outcome.metrics_path << "\n";
  os << "seconds " << fmt_g(outcome.seconds) << "\n";
  return {os.str()};
}

CommandOutput cmd_eval(const RunConfig& cfg, const std::string& out_dir,
                       const std::string& checkpoint, const std::string& split) {
  cfg.validate();
  ensure_dir(out_dir);
  nlohmann::json meta;
  Model model = model_from_checkpoint(checkpoint, &meta);
  DataBundle bundle = resolve_data(cfg);
  check_model_matches_task(model, bundle.task);
  const auto& clips = pick_split(bundle.data, split);
  EvalReport report = evaluate_split(model, clips, bundle.task.num_classes);

  std::string run_id = meta.value("run_id", std::string("-"));
  int epoch = meta.value("epoch", -1);
  write_text_file(out_dir + "/report.txt", report.to_text());
  std::ostringstream csv;
  csv << "run_id,epoch,split,loss,top1,mca,lr\n";
  csv << run_id << "," << epoch << "," << split << "," << fmt_g(report.mean_loss) << ","
      << fmt_g(report.top1) << "," << fmt_g(report.mca) << ",0\n";
  write_text_file(out_dir + "/report.csv", csv.str());

  std::ostringstream os;
  os << "split " << split << "\n" << report.to_text();
  return {os.str()};
}

CommandOutput cmd_ablate(const RunConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  ensure_dir(out_dir);
  DataBundle bundle = resolve_data(cfg);  // one dataset shared by every row
  std::ostringstream csv;
  csv << "run_id,config_row,epoch,split,loss,top1,mca,lr\n";
  std::ostringstream os;
  for (int row = 0; row < 5; ++row) {
    for (std::uint64_t seed : cfg.effective_seeds()) {
      RunConfig row_cfg = ablation_row_config(cfg, row, seed);
      std::string row_dir = out_dir + "/" + kAblationRows[row] + "_seed" + std::to_string(seed);
      TrainOutcome outcome = train_model(row_cfg, bundle, row_dir);
      Model model = model_from_checkpoint(outcome.checkpoint_path);
      EvalReport report = evaluate_split(model, bundle.data.test, bundle.task.num_classes);
      csv << outcome.run_id << "," << kAblationRows[row] << "," << outcome.best_epoch << ",test,"
          << fmt_g(report.mean_loss) << "," << fmt_g(report.top1) << "," << fmt_g(report.mca)
          << ",0\n";
      os << kAblationRows[row] << " seed " << seed << ": test top1 " << fmt_g(report.top1)
         << ", mca " << fmt_g(report.mca) << "\n";
    }
  }
  write_text_file(out_dir + "/ablation.csv", csv.str());
  os << "table written to " << out_dir << "/ablation.csv\n";
  return {os.str()};
}

CommandOutput cmd_sweep_ffn(const RunConfig& cfg, const std::string& out_dir,
                            const std::vector<int>& widths) {
  cfg.validate();
  if (widths.empty()) throw std::invalid_argument("sweep-ffn: width list is empty");
  for (int w : widths)
    if (w < 1) throw std::invalid_argument("sweep-ffn: width " + std::to_string(w) + " is invalid");
  ensure_dir(out_dir);
  DataBundle bundle = resolve_data(cfg);
  std::ostringstream csv;
  csv << "run_id,ffn_dim,encoder_params,epoch,split,loss,top1,mca,lr\n";
  std::ostringstream os;
  for (int width : widths) {
    RunConfig sweep_cfg = cfg;
    sweep_cfg.model.encoder.ffn_dim = width;
    std::string run_dir = out_dir + "/ffn" + std::to_string(width);
    TrainOutcome outcome = train_model(sweep_cfg, bundle, run_dir);
    Model model = model_from_checkpoint(outcome.checkpoint_path);
    EvalReport report = evaluate_split(model, bundle.data.test, bundle.task.num_classes);
    std::size_t encoder_params = model.param_report().group("encoder");
    csv << outcome.run_id << "," << width << "," << encoder_params << "," << outcome.best_epoch
        << ",test," << fmt_g(report.mean_loss) << "," << fmt_g(report.top1) << ","
        << fmt_g(report.mca) << ",0\n";
    os << "ffn " << width << ": encoder params " << encoder_params << ", test top1 "
       << fmt_g(report.top1) << "\n";
  }
  write_text_file(out_dir + "/sweep_ffn.csv", csv.str());
  os << "table written to " << out_dir << "/sweep_ffn.csv\n";
  return {os.str()};
}

CommandOutput cmd_param_report(const RunConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  ensure_dir(out_dir);
  SynthTaskConfig task;
  if (cfg.data.synth) {
    task = *cfg.data.synth;
  } else {
    std::ifstream is(*cfg.data.path + "/index.json");
    if (!is) throw IoError("dataset index not found in " + *cfg.data.path);
    nlohmann::json j;
    is >> j;
    task = synth_config_from_json(j.at("config"));
  }
  Model model(apply_ablation(cfg.model, cfg.ablation), input_spec_from_synth(task));
  ParamReport report = model.param_report();
  write_text_file(out_dir + "/params.txt", report.to_text());
  return {report.to_text()};
}

GradCheckReport full_pipeline_gradcheck(const AblationSwitches& ablation, Activation activation) {
  // Tiny by construction: N = 8 tokens, C = 8, well under the N<=32 cap.
  SynthTaskConfig task;
  task.num_classes = 3;
  task.t_frames = 2;
  task.height_px = 4;
  task.width_px = 4;
  task.channels = 1;
  task.rotation_extents = {0.25, 0.5, 1.0};
  task.noise_sigma = 0.0;
  task.seed = 7;

  ModelConfig mc;
  mc.patch_h = 2;
  mc.patch_w = 2;
  mc.embed_dim = 8;
  mc.backbone_depth = 0;
  mc.positional_encoding = true;
  mc.encoder.layers = 1;
  mc.encoder.heads = 2;
  mc.encoder.model_dim = 8;
  mc.encoder.ffn_dim = 16;
  mc.encoder.activation = activation;
  mc.propagation.alpha = 0.1;
  mc.propagation.k_prop = 3;

  Model model(apply_ablation(mc, ablation), input_spec_from_synth(task));
  model.init_params(11);
  Rng rng = Rng(task.seed).fork("gradcheck-clip");
  LabeledClip sample = generate_clip(task, 1, rng);
  auto fn = [&]() { return cross_entropy(model.forward(sample.clip).logits, sample.label); };
  return grad_check(fn, model.params(), 1e-6);
}

CommandOutput cmd_gradcheck(const RunConfig& cfg, const std::string& out_dir, bool inject_fault,
                            double* max_rel_err_out) {
  cfg.validate();
  ensure_dir(out_dir);
  if (inject_fault) set_fault_injection(FaultInjection::matmul_grad_sign_flip);
  GradCheckReport report;
  try {
    report = full_pipeline_gradcheck(cfg.ablation, cfg.model.encoder.activation);
  } catch (...) {
    set_fault_injection(FaultInjection::none);
    throw;
  }
  set_fault_injection(FaultInjection::none);
  if (max_rel_err_out) *max_rel_err_out = report.max_rel_err;

  // Worst error per parameter group (prefix up to the first '.').
  std::vector<std::pair<std::string, double>> groups;
  for (const auto& [name, err] : report.per_param) {
    std::string group = name.substr(0, name.find('.'));
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const auto& g) { return g.first == group; });
    if (it == groups.end())
      groups.emplace_back(group, err);
    else
      it->second = std::max(it->second, err);
  }
  std::ostringstream os;
  for (const auto& [group, err] : groups) os << group << " " << fmt_g(err) << "\n";
  os << "max_rel_err " << fmt_g(report.max_rel_err) << "\n";
  os << (report.max_rel_err < 1e-5 ? "PASS" : "FAIL") << "\n";
  write_text_file(out_dir + "/gradcheck.txt", os.str());
  return {os.str()};
}

CommandOutput cmd_bench(const RunConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  ensure_dir(out_dir);
  BenchReport report = run_propagation_bench();
  write_text_file(out_dir + "/bench.csv", report.to_csv());
  write_text_file(out_dir + "/bench.txt", report.to_text());
  return {report.to_text()};
}

CommandOutput cmd_dump_features(const RunConfig& cfg, const std::string& out_dir,
                                const std::string& checkpoint, const std::string& split,
                                const std::string& stage) {
  cfg.validate();
  if (stage != "backbone" && stage != "encoder" && stage != "graph")
    throw std::invalid_argument("unknown stage '" + stage + "' (expected backbone, encoder or graph)");
  ensure_dir(out_dir);
  Model model = model_from_checkpoint(checkpoint);
  DataBundle bundle = resolve_data(cfg);
  check_model_matches_task(model, bundle.task);
  const auto& clips = pick_split(bundle.data, split);
  if (clips.empty()) throw std::invalid_argument("dump-features: split '" + split + "' is empty");

  std::ostringstream csv;
  csv << "label";
  for (int c = 0; c < model.config().embed_dim; ++c) csv << ",f" << c;
  csv << "\n";
  for (const auto& clip : clips) {
    ForwardOut out = model.forward(clip.clip, true);
    const std::vector<double>& feat = stage == "backbone" ? out.stages.backbone
                                      : stage == "encoder" ? out.stages.encoder
                                                           : out.stages.graph;
    csv << clip.label;
    for (double v : feat) csv << "," << fmt_g(v);
    csv << "\n";
  }
  std::string path = out_dir + "/features_" + stage + "_" + split + ".csv";
  write_text_file(path, csv.str());
  std::ostringstream os;
  os << "wrote " << clips.size() << " rows to " << path << "\n";
  return {os.str()};
}

}  // namespace tag
