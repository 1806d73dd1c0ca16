#include "params.hpp"

#include <cmath>

namespace tag {

Tensor& ParamStore::add(const std::string& name, Tensor t) {
  if (index_.count(name)) throw StateError("parameter '" + name + "' already registered");
  t.set_requires_grad(true);
  index_[name] = items_.size();
  items_.emplace_back(name, std::move(t));
  return items_.back().second;
}

Tensor& ParamStore::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw StateError("unknown parameter '" + name + "'");
  return items_[it->second].second;
}

const Tensor& ParamStore::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw StateError("unknown parameter '" + name + "'");
  return items_[it->second].second;
}

void ParamStore::zero_grad() {
  for (auto& [name, t] : items_) t.zero_grad();
}

std::size_t ParamStore::total_scalars() const {
  std::size_t n = 0;
  for (const auto& [name, t] : items_) n += t.size();
  return n;
}

std::size_t ParamStore::scalars_with_prefix(const std::string& prefix) const {
  std::size_t n = 0;
  for (const auto& [name, t] : items_)
    if (name.rfind(prefix, 0) == 0) n += t.size();
  return n;
}

Tensor init_uniform_fanin(const Rng& rng, const std::string& name, Shape shape, int fan_in) {
  Rng stream = rng.fork(name);
  double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = stream.uniform(-bound, bound);
  return t;
}

Tensor init_normal(const Rng& rng, const std::string& name, Shape shape, double sigma) {
  Rng stream = rng.fork(name);
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = stream.normal(0.0, sigma);
  return t;
}

}  // namespace tag
