#include "doctest.h"

#include "sgmlab/bias_estimator.hpp"
#include "sgmlab/errors.hpp"
#include "sgmlab/synth_data.hpp"
#include "support.hpp"

#include <cmath>
#include <numbers>

using namespace sgmlab;

namespace {

const NoiseSchedule kSched = NoiseSchedule::geometric(0.79, 0.02, 6);

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i] / n, my += y[i] / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

TEST_CASE("point mass oracle has no bias") {
  Rng rng(1);
  const Conformation star = testing::random_conformation(4, rng);
  const GaussianMixtureScore oracle(point_mass(star));
  BiasConfig cfg;
  cfg.samples_per_level = 200;
  cfg.a = kSched.sigma_min() * kSched.sigma_min();
  const auto rep = estimate_bias(oracle, kSched, {star, star}, cfg);
  REQUIRE(rep.levels.size() == 6);
  for (const auto& l : rep.levels) {
    CHECK(l.mean_abs_bias < 1e-9);
    CHECK(l.n == 200);
  }
}

TEST_CASE("zero model bias is the mean absolute Gaussian") {
  ZeroScore zero(3);
  Rng rng(2);
  const std::vector<Conformation> data{testing::random_conformation(3, rng), testing::random_conformation(3, rng)};
  BiasConfig cfg;
  cfg.samples_per_level = 2000;
  cfg.seed = 9;
  const auto rep = estimate_bias(zero, kSched, data, cfg);
  for (int t = 1; t <= 6; ++t) {
    const double expected = kSched.sigma(t) * 3.0 * std::sqrt(2.0 / std::numbers::pi);
    CHECK(rep.levels[t - 1].mean_abs_bias == doctest::Approx(expected).epsilon(0.05));
    CHECK(rep.levels[t - 1].sigma == kSched.sigma(t));
    CHECK(rep.levels[t - 1].level == t);
    if (t > 1) CHECK(rep.levels[t - 1].mean_abs_bias < rep.levels[t - 2].mean_abs_bias);
  }
}

TEST_CASE("constant score offset increases bias monotonically") {
  Rng rng(3);
  const Conformation star = testing::random_conformation(3, rng);
  const GaussianMixtureScore oracle(point_mass(star));
  BiasConfig cfg;
  cfg.samples_per_level = 50;
  cfg.a = kSched.sigma_min() * kSched.sigma_min();
  std::vector<std::vector<double>> per_b;
  for (double b : {0.0, 0.5, 1.0}) {
    const OffsetScore shifted(oracle, b);
    std::vector<double> row;
    for (const auto& l : estimate_bias(shifted, kSched, {star}, cfg).levels) row.push_back(l.mean_abs_bias);
    per_b.push_back(row);
  }
  for (int t = 0; t < 6; ++t) {
    CHECK(per_b[1][t] > per_b[0][t]);
    CHECK(per_b[2][t] > per_b[1][t]);
  }
}

TEST_CASE("bias report bookkeeping") {
  ZeroScore zero(2);
  Rng rng(4);
  const std::vector<Conformation> data{testing::random_conformation(2, rng)};
  BiasConfig cfg;
  cfg.samples_per_level = 30;
  cfg.keep_raw = true;
  const auto rep = estimate_bias(zero, kSched, data, cfg);
  double weighted = 0;
  std::int64_t total = 0;
  for (const auto& l : rep.levels) {
    CHECK(l.per_sample.size() == 30);
    CHECK(l.signed_residuals.size() == 30 * 6);
    double mean = 0;
    for (double e : l.per_sample) mean += e / 30;
    CHECK(mean == doctest::Approx(l.mean_abs_bias).epsilon(1e-12));
    double l1 = 0;
    for (std::size_t i = 0; i < 6; ++i) l1 += std::abs(l.signed_residuals[i]);
    CHECK(l1 / 2 == doctest::Approx(l.per_sample[0]).epsilon(1e-12));
    weighted += l.mean_abs_bias * static_cast<double>(l.n);
    total += l.n;
  }
  CHECK(rep.global_mean == doctest::Approx(weighted / static_cast<double>(total)).epsilon(1e-12));

  cfg.keep_raw = false;
  for (const auto& l : estimate_bias(zero, kSched, data, cfg).levels) {
    CHECK(l.per_sample.empty());
    CHECK(l.signed_residuals.empty());
  }
}

TEST_CASE("bias samples have their own streams") {
  ZeroScore zero(2);
  Rng rng(5);
  const std::vector<Conformation> data{testing::random_conformation(2, rng), testing::random_conformation(2, rng)};
  BiasConfig cfg;
  cfg.samples_per_level = 10;
  cfg.keep_raw = true;
  cfg.seed = 3;
  const auto a = estimate_bias(zero, kSched, data, cfg);
  const auto b = estimate_bias(zero, kSched, data, cfg);
  cfg.samples_per_level = 4;
  const auto prefix = estimate_bias(zero, kSched, data, cfg);
  for (int t = 0; t < 6; ++t) {
    CHECK(a.levels[t].per_sample == b.levels[t].per_sample);
    for (int k = 0; k < 4; ++k) CHECK(prefix.levels[t].per_sample[k] == a.levels[t].per_sample[k]);
  }
}

TEST_CASE("uniform level mode") {
  ZeroScore zero(2);
  Rng rng(6);
  BiasConfig cfg;
  cfg.samples_per_level = 100;
  cfg.uniform_levels = true;
  const auto rep = estimate_bias(zero, kSched, {testing::random_conformation(2, rng)}, cfg);
  std::int64_t total = 0;
  for (const auto& l : rep.levels) {
    total += l.n;
    CHECK(l.n > 50);
    CHECK(l.n < 150);
  }
  CHECK(total == 600);
}

TEST_CASE("bias preconditions") {
  ZeroScore zero(2);
  Rng rng(7);
  const std::vector<Conformation> data{testing::random_conformation(2, rng)};
  BiasConfig cfg;
  cfg.samples_per_level = 0;
  CHECK_THROWS_AS(estimate_bias(zero, kSched, data, cfg), ConfigError);
  cfg = {};
  cfg.det_steps = 0;
  CHECK_THROWS_AS(estimate_bias(zero, kSched, data, cfg), ConfigError);
  cfg = {};
  CHECK_THROWS_AS(estimate_bias(zero, kSched, {}, cfg), ConfigError);
  CHECK_THROWS_AS(estimate_bias(zero, kSched, {testing::random_conformation(3, rng)}, cfg), ConfigError);
}

TEST_CASE("histogram of standard normal draws") {
  Rng rng(8);
  std::normal_distribution<double> n;
  std::vector<double> v(100000);
  for (auto& x : v) x = n(rng);
  const Histogram h = bias_histogram(v, 40);
  CHECK(std::abs(h.mean) < 0.02);
  CHECK(std::abs(h.skewness) < 0.05);
  CHECK(h.std == doctest::Approx(1.0).epsilon(0.01));
  REQUIRE(h.edges.size() == 41);
  REQUIRE(h.counts.size() == 40);
  CHECK(h.edges.front() == doctest::Approx(h.mean - 4 * h.std));
  CHECK(h.edges.back() == doctest::Approx(h.mean + 4 * h.std));
  std::int64_t total = h.outside;
  for (auto c : h.counts) total += c;
  CHECK(total == 100000);
  CHECK_FALSE(h.degenerate);
  // Central bins hold the most mass.
  CHECK(h.counts[19] > h.counts[5]);
  CHECK(h.counts[20] > h.counts[34]);
}

TEST_CASE("histogram skewness sign") {
  Rng rng(9);
  std::exponential_distribution<double> e(1.0);
  std::vector<double> v(5000);
  for (auto& x : v) x = e(rng);
  CHECK(bias_histogram(v).skewness == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("constant input is degenerate") {
  const std::vector<double> v(150, 0.25);
  const Histogram h = bias_histogram(v, 10);
  CHECK(h.degenerate);
  CHECK(h.std == 0.0);
  CHECK(h.skewness == 0.0);
  int occupied = 0;
  for (auto c : h.counts) occupied += c > 0;
  CHECK(occupied == 1);
}

TEST_CASE("histogram needs enough samples") {
  CHECK_THROWS_AS(bias_histogram(std::vector<double>(99, 1.0)), InsufficientDataError);
  CHECK_NOTHROW(bias_histogram(std::vector<double>(100, 1.0)));
  CHECK_THROWS_AS(bias_histogram(std::vector<double>(100, 1.0), 0), ConfigError);
}

TEST_CASE("spearman") {
  const std::vector<double> x{0.1, 0.2, 0.3, 0.4, 0.5};
  CHECK(spearman(x, std::vector<double>{1, 4, 9, 16, 25}) == doctest::Approx(1.0));
  CHECK(spearman(x, std::vector<double>{5, 4, 3, 2, 1}) == doctest::Approx(-1.0));
  const std::vector<double> a{1, 2, 2, 3}, b{1, 3, 2, 4};
  CHECK(spearman(a, b) == doctest::Approx(pearson({1, 2.5, 2.5, 4}, {1, 3, 2, 4})).epsilon(1e-12));
  const std::vector<double> c{3, 1, 4, 1, 5, 9, 2, 6}, d{2, 7, 1, 8, 2, 8, 1, 8};
  CHECK(spearman(c, d) == doctest::Approx(pearson({4, 1.5, 5, 1.5, 6, 8, 3, 7}, {3.5, 5, 1.5, 7, 3.5, 7, 1.5, 7}))
                              .epsilon(1e-12));
}
