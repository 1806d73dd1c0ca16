#pragma once

#include <functional>
#include <string>
#include <vector>

#include "params.hpp"

namespace tag {

struct GradCheckReport {
  double max_rel_err = 0.0;
  // Worst relative error per parameter, in store order.
  std::vector<std::pair<std::string, double>> per_param;
};

// Compares one reverse-mode pass against central differences, entry by entry.
// `fn` must rebuild the scalar loss from the current parameter values; it is
// called once under a tape and then 2 * total_scalars times without one.
// Relative error: |analytic - fd| / max(|analytic|, |fd|, 1e-8).
GradCheckReport grad_check(const std::function<Tensor()>& fn, ParamStore& params, double eps = 1e-6);

}  // namespace tag
