#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "rng.hpp"
#include "tensor.hpp"

namespace tag {

// Ordered, named store of learnable tensors. Order is creation order and is
// the canonical iteration order for optimizer state and checkpoints.
class ParamStore {
 public:
  Tensor& add(const std::string& name, Tensor t);
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  bool has(const std::string& name) const { return index_.count(name) != 0; }

  std::size_t count() const { return items_.size(); }
  const std::string& name(std::size_t i) const { return items_[i].first; }
  Tensor& tensor(std::size_t i) { return items_[i].second; }
  const Tensor& tensor(std::size_t i) const { return items_[i].second; }

  void zero_grad();
  std::size_t total_scalars() const;

  // Sum of parameter counts for names starting with `prefix`.
  std::size_t scalars_with_prefix(const std::string& prefix) const;

 private:
  std::vector<std::pair<std::string, Tensor>> items_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Conventional initializers; every draw comes from a stream forked off the
// parameter name so adding a parameter never shifts another one's values.
Tensor init_uniform_fanin(const Rng& rng, const std::string& name, Shape shape, int fan_in);
Tensor init_normal(const Rng& rng, const std::string& name, Shape shape, double sigma);

}  // namespace tag
