#include "optim.hpp"

#include <cmath>

namespace tag {

Adam::Adam(const ParamStore& params, AdamConfig cfg) : cfg_(cfg) {
  m_.reserve(params.count());
  v_.reserve(params.count());
  for (std::size_t i = 0; i < params.count(); ++i) {
    m_.emplace_back(params.tensor(i).size(), 0.0);
    v_.emplace_back(params.tensor(i).size(), 0.0);
  }
}

void Adam::step(ParamStore& params, double lr) {
  if (params.count() != m_.size()) throw ShapeError("adam: parameter count changed since construction");
  ++step_count_;
  double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_count_));
  double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_count_));
  for (std::size_t i = 0; i < params.count(); ++i) {
    Tensor& p = params.tensor(i);
    if (p.size() != m_[i].size()) throw ShapeError("adam: parameter '" + params.name(i) + "' changed shape");
    const auto& g = p.grad();
    double* pv = p.data();
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < m.size(); ++j) {
      m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * g[j];
      v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * g[j] * g[j];
      double mhat = m[j] / bc1;
      double vhat = v[j] / bc2;
      pv[j] -= lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

double cosine_lr(long step, long total_steps, double lr_max, double lr_min) {
  if (total_steps < 1) throw std::invalid_argument("cosine_lr: total_steps must be >= 1");
  if (step < 0 || step > total_steps)
    throw std::invalid_argument("cosine_lr: step " + std::to_string(step) + " outside [0, " +
                                std::to_string(total_steps) + "]");
  double phase = M_PI * static_cast<double>(step) / static_cast<double>(total_steps);
  return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + std::cos(phase));
}

}  // namespace tag
