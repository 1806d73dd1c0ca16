#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace tag {

// Counter-style splittable generator built on splitmix64. fork() derives an
// independent stream from a label without advancing the parent, so data
// generation, weight init and shuffling never share draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(mix(seed ^ 0x9e3779b97f4a7c15ull)) {}

  Rng fork(std::string_view label) const {
    std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
    for (char ch : label) {
      h ^= static_cast<unsigned char>(ch);
      h *= 0x100000001b3ull;
    }
    return Rng(raw(mix(state_ ^ h)));
  }

  Rng fork(std::uint64_t n) const { return Rng(raw(mix(state_ + 0x632be59bd9b4e019ull * (n + 1)))); }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix(state_);
  }

  // [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal(double mu = 0.0, double sigma = 1.0) {
    // Box-Muller; u1 shifted into (0, 1] to keep the log finite.
    double u1 = 1.0 - uniform();
    double u2 = uniform();
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    return mu + sigma * z;
  }

  // [0, n)
  std::uint64_t below(std::uint64_t n) { return n ? next_u64() % n : 0; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  struct raw {
    explicit raw(std::uint64_t s) : s(s) {}
    std::uint64_t s;
  };
  explicit Rng(raw r) : state_(r.s) {}

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace tag
