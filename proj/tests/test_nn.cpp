#include "doctest.h"

#include "sgmlab/errors.hpp"
#include "sgmlab/nn/adam.hpp"
#include "sgmlab/nn/grad_check.hpp"
#include "sgmlab/nn/mlp.hpp"
#include "support.hpp"

#include <cmath>
#include <random>

using namespace sgmlab;
using namespace sgmlab::nn;

namespace {

double silu(double x) { return x / (1.0 + std::exp(-x)); }

// Output layer drawn too, so gradients reach every layer.
Mlp random_net(const std::vector<int>& layout, Activation act, std::uint64_t seed) {
  Mlp m = Mlp::init(layout, act, seed);
  Rng rng(seed + 17);
  std::normal_distribution<double> n(0.0, 0.5);
  auto& last = m.params().back();
  for (Eigen::Index i = 0; i < last.weight.size(); ++i) last.weight.data()[i] = n(rng);
  for (Eigen::Index i = 0; i < last.bias.size(); ++i) last.bias.data()[i] = n(rng);
  for (auto& l : m.params())
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias.data()[i] = n(rng);
  return m;
}

}  // namespace

TEST_CASE("init zeroes the output layer") {
  Mlp m = Mlp::init({2, 1}, Activation::kSilu, 7);
  Eigen::VectorXd x(2);
  x << 0.3, -1.2;
  CHECK(m.forward(x)(0) == 0.0);

  Mlp deep = Mlp::init({5, 16, 16, 4}, Activation::kSilu, 3);
  const Eigen::VectorXd y = deep.forward(Eigen::VectorXd::Random(5));
  CHECK(y.isZero(0.0));
  CHECK(deep.params().back().weight.isZero(0.0));
  CHECK(deep.params().back().bias.isZero(0.0));
}

TEST_CASE("init is seeded") {
  CHECK(Mlp::init({4, 8, 3}, Activation::kSilu, 5) == Mlp::init({4, 8, 3}, Activation::kSilu, 5));
  CHECK_FALSE(Mlp::init({4, 8, 3}, Activation::kSilu, 5) ==
              Mlp::init({4, 8, 3}, Activation::kSilu, 6));
}

TEST_CASE("init weight scale follows fan-in") {
  Mlp m = Mlp::init({400, 300, 1}, Activation::kSilu, 1);
  const auto& w = m.params()[0].weight;
  const double mean = w.mean();
  const double var = (w.array() - mean).square().mean();
  CHECK(std::abs(mean) < 0.005);
  CHECK(var == doctest::Approx(1.0 / 400).epsilon(0.03));
}

TEST_CASE("init rejects bad layouts") {
  CHECK_THROWS_AS(Mlp::init({}, Activation::kSilu, 0), ConfigError);
  CHECK_THROWS_AS(Mlp::init({3}, Activation::kSilu, 0), ConfigError);
  CHECK_THROWS_AS(Mlp::init({3, 0, 2}, Activation::kSilu, 0), ConfigError);
}

TEST_CASE("identity layer") {
  ParamSet p{{Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2)}};
  Mlp m(p, Activation::kSilu);
  Eigen::VectorXd x(2);
  x << 1.0, -2.0;
  const Eigen::VectorXd y = m.forward(x);
  CHECK(y(0) == 1.0);
  CHECK(y(1) == -2.0);
}

TEST_CASE("hand-evaluated hidden layer") {
  Eigen::MatrixXd w1(2, 2), w2(1, 2);
  w1 << 0.5, -1.0, 2.0, 0.25;
  w2 << 1.5, -0.75;
  Eigen::VectorXd b1(2), b2(1);
  b1 << 0.1, -0.2;
  b2 << 0.3;
  Mlp m({{w1, b1}, {w2, b2}}, Activation::kSilu);
  Eigen::VectorXd x(2);
  x << 0.4, 0.8;
  const double h1 = silu(0.5 * 0.4 - 1.0 * 0.8 + 0.1);
  const double h2 = silu(2.0 * 0.4 + 0.25 * 0.8 - 0.2);
  CHECK(m.forward(x)(0) == doctest::Approx(1.5 * h1 - 0.75 * h2 + 0.3).epsilon(1e-14));

  Mlp t({{w1, b1}, {w2, b2}}, Activation::kTanh);
  CHECK(t.forward(x)(0) ==
        doctest::Approx(1.5 * std::tanh(-0.5) - 0.75 * std::tanh(0.8) + 0.3).epsilon(1e-14));
}

TEST_CASE("forward shape errors") {
  Mlp m = Mlp::init({3, 4, 2}, Activation::kSilu, 0);
  CHECK_THROWS_AS(m.forward(Eigen::VectorXd::Zero(2)), ShapeError);
  CHECK_THROWS_AS(m.forward(Eigen::MatrixXd::Zero(4, 5), nullptr), ShapeError);
  CHECK_THROWS_AS(m.backward(Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3)), ShapeError);
}

TEST_CASE("forward is pure and batch agrees with single") {
  Mlp m = random_net({3, 8, 8, 2}, Activation::kSilu, 4);
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, 5);
  const Eigen::MatrixXd y = m.forward(x, nullptr);
  CHECK(y == m.forward(x, nullptr));
  for (int j = 0; j < 5; ++j) {
    const Eigen::VectorXd col = m.forward(Eigen::VectorXd(x.col(j)));
    CHECK((col - y.col(j)).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("scalar chain rule") {
  Eigen::MatrixXd w(1, 1);
  w << 0.7;
  Mlp m({{w, Eigen::VectorXd::Zero(1)}}, Activation::kIdentity);
  Eigen::VectorXd x(1), up(1);
  x << 3.0;
  up << 1.0;
  const auto g = m.backward(x, up);
  CHECK(g.params[0].weight(0, 0) == 3.0);
  CHECK(g.params[0].bias(0) == 1.0);
  CHECK(g.input(0) == doctest::Approx(0.7));
}

TEST_CASE("zero upstream gives zero gradients") {
  Mlp m = random_net({4, 6, 3}, Activation::kSilu, 2);
  const auto g = m.backward(Eigen::VectorXd::Random(4), Eigen::VectorXd::Zero(3));
  for (const auto& l : g.params) {
    CHECK(l.weight.isZero(0.0));
    CHECK(l.bias.isZero(0.0));
  }
  CHECK(g.input.isZero(0.0));
}

TEST_CASE("backward matches finite differences") {
  const std::vector<std::vector<int>> layouts{{1, 1}, {3, 5, 2}, {4, 7, 7, 3}, {6, 9, 8, 7, 5}};
  int seed = 0;
  for (const auto& layout : layouts) {
    for (Activation act : {Activation::kSilu, Activation::kTanh}) {
      Mlp m = random_net(layout, act, ++seed);
      Rng rng(seed);
      std::normal_distribution<double> n;
      Eigen::VectorXd x(layout.front()), up(layout.back());
      for (auto& v : x) v = n(rng);
      for (auto& v : up) v = n(rng);
      const auto g = m.backward(x, up);
      auto f = [&] { return up.dot(m.forward(x)); };
      CHECK(testing::max_rel(g.params, testing::numeric_grad(m.params(), f)) < 1e-4);

      Eigen::VectorXd xi = x;
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        xi(i) = x(i) + 1e-5;
        const double a = up.dot(m.forward(xi));
        xi(i) = x(i) - 1e-5;
        const double b = up.dot(m.forward(xi));
        xi(i) = x(i);
        const double num = (a - b) / 2e-5;
        CHECK(std::abs(num - g.input(i)) / std::max({std::abs(num), std::abs(g.input(i)), 1e-12}) <
              1e-4);
      }
    }
  }
}

TEST_CASE("batched backward sums per-sample gradients") {
  Mlp m = random_net({3, 6, 2}, Activation::kSilu, 9);
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, 4);
  Eigen::MatrixXd up = Eigen::MatrixXd::Random(2, 4);
  ForwardCache cache;
  m.forward(x, &cache);
  ParamSet g = zeros_like(m.params());
  Eigen::MatrixXd gin;
  m.backward(cache, up, g, &gin);
  ParamSet sum = zeros_like(m.params());
  for (int j = 0; j < 4; ++j) {
    const auto gj = m.backward(Eigen::VectorXd(x.col(j)), Eigen::VectorXd(up.col(j)));
    for (std::size_t k = 0; k < sum.size(); ++k) {
      sum[k].weight += gj.params[k].weight;
      sum[k].bias += gj.params[k].bias;
    }
    CHECK((gin.col(j) - gj.input).cwiseAbs().maxCoeff() < 1e-14);
  }
  CHECK(testing::max_rel(g, sum) < 1e-12);
}

TEST_CASE("grad_check on a linear net with quadratic loss") {
  Mlp m = random_net({3, 2}, Activation::kIdentity, 1);
  OutputLoss q{[](const Eigen::VectorXd& y) { return 0.5 * y.squaredNorm(); },
               [](const Eigen::VectorXd& y) { return Eigen::VectorXd(y); }};
  Eigen::VectorXd x(3);
  x << 0.5, -1.0, 2.0;
  CHECK(grad_check(m, x, q) < 1e-8);
}

TEST_CASE("grad_check on a three-hidden-layer net") {
  Mlp m = random_net({5, 12, 12, 12, 4}, Activation::kSilu, 8);
  OutputLoss q{[](const Eigen::VectorXd& y) { return (y.array().sin() * y.array()).sum(); },
               [](const Eigen::VectorXd& y) {
                 return Eigen::VectorXd(y.array().sin() + y.array() * y.array().cos());
               }};
  CHECK(grad_check(m, Eigen::VectorXd::Random(5), q) < 1e-4);
}

TEST_CASE("grad_check flags a wrong gradient") {
  Mlp m = random_net({3, 4, 2}, Activation::kSilu, 3);
  OutputLoss wrong{[](const Eigen::VectorXd& y) { return y.squaredNorm(); },
                   [](const Eigen::VectorXd& y) { return Eigen::VectorXd(y); }};
  CHECK(grad_check(m, Eigen::VectorXd::Random(3), wrong) > 0.1);
}

TEST_CASE("grad_check rejects a non-positive step") {
  Mlp m = random_net({2, 2}, Activation::kSilu, 3);
  OutputLoss q{[](const Eigen::VectorXd& y) { return y.sum(); },
               [](const Eigen::VectorXd& y) { return Eigen::VectorXd::Ones(y.size()).eval(); }};
  CHECK_THROWS_AS(grad_check(m, Eigen::VectorXd::Zero(2), q, 0.0), ConfigError);
  CHECK_THROWS_AS(grad_check(m, Eigen::VectorXd::Zero(2), q, -1e-5), ConfigError);
}

TEST_CASE("adam with zero gradient leaves parameters") {
  Mlp m = random_net({3, 4, 2}, Activation::kSilu, 3);
  const Mlp before = m;
  AdamState st = AdamState::for_model(m);
  for (int i = 0; i < 3; ++i) adam_step(m, zeros_like(m.params()), st, 1e-2);
  CHECK(m == before);
  CHECK(st.step == 3);
}

TEST_CASE("adam first step moves by lr times sign") {
  Eigen::MatrixXd w(1, 1);
  w << 2.0;
  Mlp m({{w, Eigen::VectorXd::Zero(1)}}, Activation::kIdentity);
  AdamState st = AdamState::for_model(m);
  ParamSet g = zeros_like(m.params());
  g[0].weight(0, 0) = -0.37;
  g[0].bias(0) = 5.0;
  adam_step(m, g, st, 0.01);
  // m1 = 0.1 g, v1 = 0.001 g^2; corrected: g and g^2.
  const double expected_w = 2.0 + 0.01 * 0.37 / (0.37 + 1e-8);
  const double expected_b = -0.01 * 5.0 / (5.0 + 1e-8);
  CHECK(m.params()[0].weight(0, 0) == doctest::Approx(expected_w).epsilon(1e-14));
  CHECK(m.params()[0].bias(0) == doctest::Approx(expected_b).epsilon(1e-14));
}

TEST_CASE("adam matches the hand recurrence over several steps") {
  Eigen::MatrixXd w(1, 1);
  w << 1.0;
  Mlp m({{w, Eigen::VectorXd::Zero(1)}}, Activation::kIdentity);
  AdamState st = AdamState::for_model(m);
  double p = 1.0, m1 = 0.0, v1 = 0.0;
  const double grads[] = {0.5, -0.2, 0.1, 0.9};
  for (int t = 1; t <= 4; ++t) {
    const double g = grads[t - 1];
    m1 = 0.9 * m1 + 0.1 * g;
    v1 = 0.999 * v1 + 0.001 * g * g;
    const double mh = m1 / (1 - std::pow(0.9, t));
    const double vh = v1 / (1 - std::pow(0.999, t));
    p -= 0.05 * mh / (std::sqrt(vh) + 1e-8);
    ParamSet gs = zeros_like(m.params());
    gs[0].weight(0, 0) = g;
    adam_step(m, gs, st, 0.05);
  }
  CHECK(m.params()[0].weight(0, 0) == doctest::Approx(p).epsilon(1e-13));
}

TEST_CASE("adam is deterministic") {
  auto run = [] {
    Mlp m = random_net({3, 4, 2}, Activation::kSilu, 3);
    AdamState st = AdamState::for_model(m);
    for (int i = 0; i < 5; ++i) {
      const auto g = m.backward(Eigen::VectorXd::Constant(3, 0.1 * i), Eigen::VectorXd::Ones(2));
      adam_step(m, g.params, st, 1e-3);
    }
    return m;
  };
  CHECK(run() == run());
}

TEST_CASE("adam rejects non-finite gradients without mutating") {
  Mlp m = random_net({2, 2}, Activation::kSilu, 3);
  const Mlp before = m;
  AdamState st = AdamState::for_model(m);
  adam_step(m, zeros_like(m.params()), st, 1e-3);
  ParamSet g = zeros_like(m.params());
  g[0].bias(1) = std::nan("");
  try {
    adam_step(m, g, st, 1e-3);
    FAIL("expected TrainingError");
  } catch (const TrainingError& e) {
    CHECK(e.step() == 2);
  }
  CHECK(m == before);
  CHECK(st.step == 1);
}
