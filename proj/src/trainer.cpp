#include "trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include "checkpoint.hpp"
#include "ops.hpp"
#include "util.hpp"

namespace tag {

namespace {

double seconds_now() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

std::string csv_row(const std::string& run_id, int epoch, const char* split, double loss,
                    double top1, double mca, double lr) {
  return run_id + "," + std::to_string(epoch) + "," + split + "," + fmt_g(loss) + "," + fmt_g(top1) +
         "," + fmt_g(mca) + "," + fmt_g(lr) + "\n";
}

}  // namespace

DataBundle resolve_data(const RunConfig& cfg) {
  DataBundle bundle;
  if (cfg.data.synth) {
    bundle.task = *cfg.data.synth;
    bundle.data = generate_dataset(bundle.task);
  } else {
    bundle.data = load_dataset(*cfg.data.path, &bundle.task);
  }
  return bundle;
}

EvalReport evaluate_split(Model& model, const std::vector<LabeledClip>& clips, int num_classes) {
  if (clips.empty()) throw std::invalid_argument("evaluate: empty split");
  std::vector<int> preds, truths;
  preds.reserve(clips.size());
  truths.reserve(clips.size());
  double loss_sum = 0.0;
  for (const auto& clip : clips) {
    ForwardOut out = model.forward(clip.clip);
    preds.push_back(argmax_lowest(out.logits.data(), out.logits.dim(0)));
    truths.push_back(clip.label);
    loss_sum += cross_entropy(out.logits, clip.label).item();
  }
  EvalReport report = evaluate(preds, truths, num_classes);
  report.mean_loss = loss_sum / static_cast<double>(clips.size());
  return report;
}

TrainOutcome train_model(const RunConfig& cfg, const DataBundle& bundle, const std::string& out_dir) {
  cfg.validate();
  double t_start = seconds_now();
  ensure_dir(out_dir);

  nlohmann::json resolved = run_config_to_json(cfg);
  write_text_file(out_dir + "/config.json", resolved.dump(2) + "\n");

  TrainOutcome outcome;
  outcome.run_id = hex16(fnv1a(resolved.dump()));
  outcome.metrics_path = out_dir + "/metrics.csv";
  outcome.checkpoint_path = out_dir + "/best.ckpt";

  const auto& train_set = bundle.data.train;
  const auto& val_set = bundle.data.val;
  if (cfg.train.epochs > 0 && train_set.empty())
    throw std::invalid_argument("train: the training split is empty");
  if (cfg.train.epochs > 0 && val_set.empty())
    throw std::invalid_argument("train: a validation split is required for model selection");

  ModelConfig model_cfg = apply_ablation(cfg.model, cfg.ablation);
  Model model(model_cfg, input_spec_from_synth(bundle.task));
  model.init_params(cfg.seed);
  Adam opt(model.params());

  std::ofstream csv(outcome.metrics_path, std::ios::binary);
  if (!csv) throw IoError("cannot write " + outcome.metrics_path);
  csv << "run_id,epoch,split,loss,top1,mca,lr\n";

  nlohmann::json meta = model.meta_json();
  meta["run_id"] = outcome.run_id;
  meta["seed"] = cfg.seed;

  if (cfg.train.epochs == 0) {
    meta["epoch"] = -1;
    save_checkpoint(outcome.checkpoint_path, model.params(), meta);
    outcome.seconds = seconds_now() - t_start;
    return outcome;
  }

  Rng shuffle_root = Rng(cfg.seed).fork("shuffle");
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < cfg.train.epochs; ++epoch) {
    double lr = cosine_lr(epoch, cfg.train.epochs, cfg.train.lr_max, cfg.train.lr_min);
    Rng shuffle_rng = shuffle_root.fork(static_cast<std::uint64_t>(epoch));
    shuffle_rng.shuffle(order);

    std::vector<int> train_preds, train_truths;
    train_preds.reserve(train_set.size());
    train_truths.reserve(train_set.size());
    double train_loss_sum = 0.0;

    for (std::size_t start = 0; start < order.size(); start += cfg.train.batch_size) {
      std::size_t end = std::min(order.size(), start + cfg.train.batch_size);
      double inv_batch = 1.0 / static_cast<double>(end - start);
      model.params().zero_grad();
      for (std::size_t i = start; i < end; ++i) {
        const LabeledClip& sample = train_set[order[i]];
        Tape tape;
        {
          TapeScope scope(tape);
          ForwardOut out = model.forward(sample.clip);
          Tensor ce = cross_entropy(out.logits, sample.label);
          double loss_value = ce.item();
          if (!std::isfinite(loss_value)) throw Error("training diverged: non-finite loss");
          train_loss_sum += loss_value;
          train_preds.push_back(argmax_lowest(out.logits.data(), out.logits.dim(0)));
          train_truths.push_back(sample.label);
          tape.backward(scale(ce, inv_batch));
        }
      }
      opt.step(model.params(), lr);
    }

    EvalReport train_report = evaluate(train_preds, train_truths, bundle.task.num_classes);
    train_report.mean_loss = train_loss_sum / static_cast<double>(train_set.size());
    csv << csv_row(outcome.run_id, epoch, "train", train_report.mean_loss, train_report.top1,
                   train_report.mca, lr);

    EvalReport val_report = evaluate_split(model, val_set, bundle.task.num_classes);
    csv << csv_row(outcome.run_id, epoch, "val", val_report.mean_loss, val_report.top1,
                   val_report.mca, lr);
    csv.flush();

    outcome.final_val_top1 = val_report.top1;
    if (outcome.best_epoch < 0 || val_report.top1 > outcome.best_val_top1) {
      outcome.best_epoch = epoch;
      outcome.best_val_top1 = val_report.top1;
      meta["epoch"] = epoch;
      save_checkpoint(outcome.checkpoint_path, model.params(), meta);
    }
  }

  outcome.seconds = seconds_now() - t_start;
  return outcome;
}

}  // namespace tag
