#include <cmath>

#include "doctest.h"
#include "npde/optim.hpp"
#include "test_support.hpp"

using namespace npde;
using namespace npde::testing;

namespace {

// (1,1,1) net: 8 entries, addressed through the flat view
ResNetParams flat_params(std::initializer_list<double> values) {
  ResNetParams p(net(1, 1, 1));
  std::size_t i = 0;
  for (double v : values) p.flat()[i++] = v;
  return p;
}

GradientBundle like(const ResNetParams& p, double fill = 0.0) {
  GradientBundle g(p.config());
  for (auto& v : g.flat()) v = fill;
  return g;
}

}  // namespace

TEST_CASE("sgd_step") {
  auto p = flat_params({0.5, -1.0, 2.0});
  const auto before = p;
  sgd_step(p, like(p), 0.3);
  CHECK(std::equal(p.flat().begin(), p.flat().end(), before.flat().begin()));

  auto z = flat_params({});
  auto g = like(z);
  g.flat()[0] = 1.0;
  g.flat()[1] = -2.0;
  sgd_step(z, g, 1.0);
  CHECK(z.flat()[0] == -1.0);
  CHECK(z.flat()[1] == 2.0);

  auto a = flat_params({0.1, 0.2, 0.3});
  auto b = a;
  const auto c = like(a, 0.7);
  sgd_step(a, c, 0.5);
  sgd_step(a, c, 0.5);
  sgd_step(b, c, 1.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.flat()[i] == doctest::Approx(b.flat()[i]).epsilon(1e-15));
  }

  GradientBundle wrong(net(2, 1, 1));
  CHECK_THROWS_AS(sgd_step(a, wrong, 0.1), std::invalid_argument);
}

TEST_CASE("first Adam step moves every entry by about lr") {
  const AdamConfig cfg;
  auto p = random_params(net(2, 3, 2), 1);
  const auto before = p;
  auto g = random_params(net(2, 3, 2), 2);  // used as gradient values
  AdamState st(p.size());
  adam_step(st, p, g, cfg);
  CHECK(st.step == 1);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double moved = p.flat()[i] - before.flat()[i];
    // m_hat = g, v_hat = g^2: update = -lr g / (|g| + eps)
    CHECK(std::abs(std::abs(moved) - cfg.lr) <= cfg.lr * 1e-5);
    CHECK(std::signbit(moved) != std::signbit(g.flat()[i]));
  }
}

TEST_CASE("Adam with zero gradients never moves") {
  auto p = random_params(net(2, 3, 2), 3);
  const auto before = p;
  AdamState st(p.size());
  for (int k = 0; k < 20; ++k) adam_step(st, p, like(p), AdamConfig{});
  CHECK(std::equal(p.flat().begin(), p.flat().end(), before.flat().begin()));
  for (double v : st.v) CHECK(v == 0.0);
  CHECK(st.step == 20);
}

TEST_CASE("Adam with zero decay is a signed step") {
  AdamConfig cfg;
  cfg.beta1 = 0.0;
  cfg.beta2 = 0.0;
  cfg.lr = 0.01;
  auto p = random_params(net(1, 2, 1), 4);
  AdamState st(p.size());
  Rng rng(5);
  for (int k = 0; k < 5; ++k) {
    auto g = like(p);
    for (auto& v : g.flat()) v = rng.uniform(-3.0, 3.0);
    const auto before = p;
    adam_step(st, p, g, cfg);
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double gi = g.flat()[i];
      const double want = before.flat()[i] - cfg.lr * gi / (std::abs(gi) + cfg.eps);
      CHECK(p.flat()[i] == doctest::Approx(want).epsilon(1e-14));
    }
  }
}

TEST_CASE("Adam steps stay bounded early on") {
  const AdamConfig cfg;
  auto p = random_params(net(2, 3, 2), 6);
  AdamState st(p.size());
  Rng rng(7);
  for (int k = 0; k < 10; ++k) {
    auto g = like(p);
    for (auto& v : g.flat()) v = rng.uniform(-1.0, 1.0) * std::pow(10.0, k - 5);
    const auto before = p;
    adam_step(st, p, g, cfg);
    for (std::size_t i = 0; i < p.size(); ++i) {
      CHECK(std::abs(p.flat()[i] - before.flat()[i]) <= 2 * cfg.lr);
    }
    for (double v : st.v) CHECK(v >= 0.0);
  }
}

TEST_CASE("Adam is deterministic") {
  const auto g = random_params(net(2, 3, 2), 8);
  auto p1 = random_params(net(2, 3, 2), 9);
  auto p2 = p1;
  AdamState s1(p1.size()), s2(p2.size());
  for (int k = 0; k < 3; ++k) {
    adam_step(s1, p1, g, AdamConfig{});
    adam_step(s2, p2, g, AdamConfig{});
  }
  CHECK(std::equal(p1.flat().begin(), p1.flat().end(), p2.flat().begin()));
  CHECK(s1.m == s2.m);
  CHECK(s1.v == s2.v);
}

TEST_CASE("Adam minimises a quadratic") {
  // loss 1/2 |theta|^2 on five entries, gradient = theta
  auto p = flat_params({});
  const double start[] = {0.6, -0.4, 0.3, 0.5, -0.3742};
  double norm = 0;
  for (int i = 0; i < 5; ++i) norm += start[i] * start[i];
  for (int i = 0; i < 5; ++i) p.flat()[i] = start[i] / std::sqrt(norm);
  AdamState st(p.size());
  for (int k = 0; k < 5000; ++k) {
    auto g = like(p);
    for (int i = 0; i < 5; ++i) g.flat()[i] = p.flat()[i];
    adam_step(st, p, g, AdamConfig{});
  }
  double final = 0;
  for (int i = 0; i < 5; ++i) final += p.flat()[i] * p.flat()[i];
  CHECK(std::sqrt(final) < 1e-3);
}

TEST_CASE("Adam argument and failure checks") {
  auto p = random_params(net(2, 3, 2), 1);
  AdamState st(p.size());
  GradientBundle wrong(net(2, 3, 1));
  CHECK_THROWS_AS(adam_step(st, p, wrong, AdamConfig{}), std::invalid_argument);
  AdamState short_state(3);
  CHECK_THROWS_AS(adam_step(short_state, p, like(p), AdamConfig{}),
                  std::invalid_argument);
  auto g = like(p);
  g.flat()[0] = std::nan("");
  CHECK_THROWS_AS(adam_step(st, p, g, AdamConfig{}), NumericalFailure);

  AdamConfig bad;
  bad.beta1 = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = {};
  bad.eps = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = {};
  bad.lr = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
