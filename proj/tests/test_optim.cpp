#include "doctest.h"

#include <cmath>

#include "optim.hpp"

using namespace tag;

namespace {

// Hand expansion of the bias-corrected update for a constant gradient g.
double hand_adam_delta(int steps, double g, double lr, double b1, double b2, double eps) {
  double m = 0.0, v = 0.0, x = 0.0;
  for (int t = 1; t <= steps; ++t) {
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g * g;
    double mhat = m / (1.0 - std::pow(b1, t));
    double vhat = v / (1.0 - std::pow(b2, t));
    x -= lr * mhat / (std::sqrt(vhat) + eps);
  }
  return x;
}

}  // namespace

TEST_CASE("adam: zero gradient leaves parameters untouched") {
  ParamStore store;
  Tensor p = store.add("p", Tensor({3}, {1.0, -2.0, 0.5}));
  Adam opt(store);
  store.zero_grad();
  opt.step(store, 1e-3);
  CHECK(p.data()[0] == 1.0);
  CHECK(p.data()[1] == -2.0);
  CHECK(p.data()[2] == 0.5);
}

TEST_CASE("adam: first step matches the hand-expanded formula") {
  ParamStore store;
  Tensor p = store.add("p", Tensor({1}, {0.0}));
  Adam opt(store);
  p.impl()->grad_ref()[0] = 1.0;
  opt.step(store, 1e-3);
  // First step: mhat = 1, vhat = 1 -> delta = -lr / (1 + eps) ~ -1e-3.
  double expected = hand_adam_delta(1, 1.0, 1e-3, 0.9, 0.999, 1e-8);
  CHECK(std::abs(p.data()[0] - expected) < 1e-12);
  CHECK(std::abs(p.data()[0] + 1e-3) < 1e-6);
  CHECK(opt.step_count() == 1);
}

TEST_CASE("adam: two identical gradients match the hand expansion") {
  ParamStore store;
  Tensor p = store.add("p", Tensor({1}, {0.0}));
  Adam opt(store);
  for (int step = 0; step < 2; ++step) {
    p.zero_grad();
    p.impl()->grad_ref()[0] = 0.37;
    opt.step(store, 2e-3);
  }
  double expected = hand_adam_delta(2, 0.37, 2e-3, 0.9, 0.999, 1e-8);
  CHECK(std::abs(p.data()[0] - expected) < 1e-12);
}

TEST_CASE("adam: lr = 0 keeps parameters bit-identical") {
  ParamStore store;
  Tensor p = store.add("p", Tensor({2}, {0.125, -7.5}));
  Adam opt(store);
  for (int step = 0; step < 3; ++step) {
    p.zero_grad();
    p.impl()->grad_ref()[0] = 1.7;
    p.impl()->grad_ref()[1] = -0.3;
    opt.step(store, 0.0);
  }
  CHECK(p.data()[0] == 0.125);
  CHECK(p.data()[1] == -7.5);
}

TEST_CASE("cosine_lr: endpoints and midpoint") {
  CHECK(cosine_lr(0, 100, 1e-2, 1e-4) == doctest::Approx(1e-2).epsilon(1e-15));
  CHECK(cosine_lr(100, 100, 1e-2, 1e-4) == doctest::Approx(1e-4).epsilon(1e-12));
  CHECK(cosine_lr(50, 100, 1e-2, 1e-4) == doctest::Approx((1e-2 + 1e-4) / 2).epsilon(1e-12));
  CHECK_THROWS_AS(cosine_lr(-1, 100, 1e-2, 1e-4), std::invalid_argument);
  CHECK_THROWS_AS(cosine_lr(101, 100, 1e-2, 1e-4), std::invalid_argument);
  CHECK_THROWS_AS(cosine_lr(0, 0, 1e-2, 1e-4), std::invalid_argument);
}
