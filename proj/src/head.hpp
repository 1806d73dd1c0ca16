#pragma once

#include <string>
#include <vector>

#include "tensor.hpp"

namespace tag {

struct ClassifierOut {
  Tensor logits;  // [num_classes]
  Tensor probs;   // softmax(logits)
};

// Global spatio-temporal average pooling over all N nodes, then the linear
// classifier: logits = W_cls * mean(H) + b_cls.
ClassifierOut pool_and_classify(const Tensor& h, const Tensor& w_cls, const Tensor& b_cls);

// -log p(label) from logits in stable log-sum-exp form (scalar tensor).
Tensor cross_entropy(const Tensor& logits, int label);

// Ties broken toward the lowest class index.
int argmax_lowest(const double* values, int n);

struct EvalReport {
  double top1 = 0.0;
  double mca = 0.0;
  std::vector<double> per_class_recall;          // NaN for classes with no samples
  std::vector<std::vector<long>> confusion;      // [truth][prediction]
  int classes_excluded = 0;                      // classes with zero test samples
  long samples = 0;
  double mean_loss = 0.0;                        // filled by callers that track loss

  // Flat key/value block, one `key value` pair per line.
  std::string to_text() const;
};

EvalReport evaluate(const std::vector<int>& predictions, const std::vector<int>& truths,
                    int num_classes);

}  // namespace tag
