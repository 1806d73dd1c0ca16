#pragma once

#include <cstdint>
#include <vector>

#include "params.hpp"

namespace tag {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam. Moment buffers follow the store's parameter order.
class Adam {
 public:
  Adam(const ParamStore& params, AdamConfig cfg = {});

  // One update from the gradients currently held by the parameters.
  void step(ParamStore& params, double lr);

  long step_count() const { return step_count_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  AdamConfig cfg_;
  long step_count_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

// lr_min + 0.5*(lr_max - lr_min)*(1 + cos(pi*step/total_steps)).
double cosine_lr(long step, long total_steps, double lr_max, double lr_min);

}  // namespace tag
