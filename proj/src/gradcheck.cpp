#include "gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace tag {

GradCheckReport grad_check(const std::function<Tensor()>& fn, ParamStore& params, double eps) {
  params.zero_grad();
  Tape tape;
  {
    TapeScope scope(tape);
    Tensor loss = fn();
    tape.backward(loss);
  }
  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.count());
  for (std::size_t i = 0; i < params.count(); ++i) analytic.emplace_back(params.tensor(i).grad().begin(), params.tensor(i).grad().end());

  GradCheckReport report;
  for (std::size_t i = 0; i < params.count(); ++i) {
    Tensor& p = params.tensor(i);
    double worst = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
      double saved = p.data()[j];
      p.data()[j] = saved + eps;
      double f_plus = fn().item();
      p.data()[j] = saved - eps;
      double f_minus = fn().item();
      p.data()[j] = saved;
      double fd = (f_plus - f_minus) / (2.0 * eps);
      double an = analytic[i][j];
      double rel = std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-8});
      worst = std::max(worst, rel);
    }
    report.per_param.emplace_back(params.name(i), worst);
    report.max_rel_err = std::max(report.max_rel_err, worst);
  }
  return report;
}

}  // namespace tag
