#include "doctest.h"

#include <cmath>
#include <vector>

#include "rng.hpp"

using tag::Rng;

TEST_CASE("rng: same seed gives identical streams") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("rng: forking never advances the parent") {
  Rng forked(7), plain(7);
  Rng child1 = forked.fork("weights");
  Rng child2 = forked.fork("weights");
  for (int i = 0; i < 20; ++i) CHECK(child1.next_u64() == child2.next_u64());
  // Parent draws are unaffected by the forks.
  for (int i = 0; i < 20; ++i) CHECK(forked.next_u64() == plain.next_u64());
}

TEST_CASE("rng: different labels give different streams") {
  Rng parent(7);
  Rng a = parent.fork("data");
  Rng b = parent.fork("init");
  int same = 0;
  for (int i = 0; i < 20; ++i)
    if (a.next_u64() == b.next_u64()) ++same;
  CHECK(same == 0);
}

TEST_CASE("rng: uniform stays in range, normal has sane moments") {
  Rng rng(3);
  double sum = 0.0, sum2 = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  for (int i = 0; i < n; ++i) {
    double z = rng.normal();
    sum += z;
    sum2 += z * z;
  }
  CHECK(std::abs(sum / n) < 0.05);
  CHECK(std::abs(sum2 / n - 1.0) < 0.05);
}

TEST_CASE("rng: shuffle is a permutation and deterministic") {
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[i] = i;
  Rng a(9), b(9);
  auto va = v, vb = v;
  a.shuffle(va);
  b.shuffle(vb);
  CHECK(va == vb);
  std::sort(va.begin(), va.end());
  CHECK(va == v);
}
