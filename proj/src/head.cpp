#include "head.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "ops.hpp"

namespace tag {

ClassifierOut pool_and_classify(const Tensor& h, const Tensor& w_cls, const Tensor& b_cls) {
  if (h.rank() != 2) throw ShapeError("pool_and_classify: features must be [N x C]");
  if (w_cls.rank() != 2 || w_cls.dim(1) != h.dim(1))
    throw ShapeError("pool_and_classify: classifier " + shape_str(w_cls.shape()) +
                     " does not match feature dim " + std::to_string(h.dim(1)));
  Tensor pooled = mean_rows(h);
  int classes = w_cls.dim(0);
  Tensor logits = add(reshape(matmul(w_cls, reshape(pooled, {pooled.dim(0), 1})), {classes}), b_cls);
  ClassifierOut out;
  out.logits = logits;
  out.probs = softmax_lastdim(logits);
  return out;
}

Tensor cross_entropy(const Tensor& logits, int label) { return cross_entropy_logits(logits, label); }

int argmax_lowest(const double* values, int n) {
  int best = 0;
  for (int i = 1; i < n; ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

std::string EvalReport::to_text() const {
  std::ostringstream os;
  os << "samples " << samples << "\n";
  os << "top1 " << top1 << "\n";
  os << "mca " << mca << "\n";
  os << "mean_loss " << mean_loss << "\n";
  os << "classes_excluded " << classes_excluded << "\n";
  for (std::size_t c = 0; c < per_class_recall.size(); ++c)
    os << "recall_class_" << c << " " << per_class_recall[c] << "\n";
  return os.str();
}

EvalReport evaluate(const std::vector<int>& predictions, const std::vector<int>& truths,
                    int num_classes) {
  if (predictions.size() != truths.size())
    throw std::invalid_argument("evaluate: prediction/truth lengths differ");
  if (predictions.empty()) throw std::invalid_argument("evaluate: empty input");
  if (num_classes < 1) throw std::invalid_argument("evaluate: need at least one class");
  EvalReport r;
  r.samples = static_cast<long>(predictions.size());
  r.confusion.assign(num_classes, std::vector<long>(num_classes, 0));
  long correct = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    int t = truths[i], p = predictions[i];
    if (t < 0 || t >= num_classes || p < 0 || p >= num_classes)
      throw std::invalid_argument("evaluate: label out of range");
    r.confusion[t][p] += 1;
    if (t == p) ++correct;
  }
  r.top1 = static_cast<double>(correct) / static_cast<double>(r.samples);
  r.per_class_recall.assign(num_classes, std::numeric_limits<double>::quiet_NaN());
  double recall_sum = 0.0;
  int counted = 0;
  for (int c = 0; c < num_classes; ++c) {
    long row = 0;
    for (int p = 0; p < num_classes; ++p) row += r.confusion[c][p];
    if (row == 0) {
      ++r.classes_excluded;
      continue;
    }
    r.per_class_recall[c] = static_cast<double>(r.confusion[c][c]) / static_cast<double>(row);
    recall_sum += r.per_class_recall[c];
    ++counted;
  }
  r.mca = counted > 0 ? recall_sum / counted : 0.0;
  return r;
}

}  // namespace tag
