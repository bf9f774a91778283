#include "sgmlab/bias_estimator.hpp"

#include "sgmlab/errors.hpp"
#include "sgmlab/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sgmlab {

void BiasConfig::validate() const {
  if (samples_per_level < 1) throw ConfigError("samples_per_level must be at least 1");
  if (det_steps < 1) throw ConfigError("det_steps must be at least 1");
  if (!(a > 0.0)) throw ConfigError("step size a must be positive");
}

BiasReport estimate_bias(const ScoreFunction& score, const NoiseSchedule& schedule,
                         const std::vector<Conformation>& dataset, const BiasConfig& cfg) {
  cfg.validate();
  if (dataset.empty()) throw ConfigError("bias estimation needs a non-empty dataset");
  const int n_atoms = score.n_atoms();
  for (const auto& c : dataset)
    if (c.rows() != n_atoms) throw ConfigError("dataset conformer atom count does not match model");

  const int levels = schedule.levels();
  BiasReport report;
  report.levels.resize(static_cast<std::size_t>(levels));
  std::vector<double> sums(static_cast<std::size_t>(levels), 0.0);
  for (int t = 1; t <= levels; ++t) {
    auto& lb = report.levels[static_cast<std::size_t>(t - 1)];
    lb.level = t;
    lb.sigma = schedule.sigma(t);
    lb.n = 0;
  }

  auto run_one = [&](int t, Rng& rng) {
    std::uniform_int_distribution<std::size_t> pick(0, dataset.size() - 1);
    const Conformation& c0 = dataset[pick(rng)];
    const Conformation eps = standard_normal(n_atoms, rng);
    const Conformation ct = c0 + schedule.sigma(t) * eps;
    const Conformation c0_hat = deterministic_reverse(score, schedule, ct, t, cfg.a, cfg.det_steps);
    const Conformation residual = c0 - c0_hat;
    const double e = residual.cwiseAbs().sum() / n_atoms;

    auto& lb = report.levels[static_cast<std::size_t>(t - 1)];
    sums[static_cast<std::size_t>(t - 1)] += e;
    lb.n += 1;
    if (cfg.keep_raw) {
      lb.per_sample.push_back(e);
      lb.signed_residuals.insert(lb.signed_residuals.end(), residual.data(),
                                 residual.data() + residual.size());
    }
  };

  const auto per_level = static_cast<std::uint64_t>(cfg.samples_per_level);
  if (!cfg.uniform_levels) {
    for (int t = 1; t <= levels; ++t) {
      for (std::uint64_t k = 0; k < per_level; ++k) {
        Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(t), k));
        run_one(t, rng);
      }
    }
  } else {
    std::uniform_int_distribution<int> level(1, levels);
    for (std::uint64_t k = 0; k < per_level * static_cast<std::uint64_t>(levels); ++k) {
      Rng rng(derive_seed(cfg.seed, 0, k));
      const int t = level(rng);
      run_one(t, rng);
    }
  }

  double weighted = 0.0;
  std::int64_t total = 0;
  for (std::size_t i = 0; i < report.levels.size(); ++i) {
    auto& lb = report.levels[i];
    lb.mean_abs_bias = lb.n > 0 ? sums[i] / static_cast<double>(lb.n) : 0.0;
    weighted += sums[i];
    total += lb.n;
  }
  report.global_mean = total > 0 ? weighted / static_cast<double>(total) : 0.0;
  return report;
}

Histogram bias_histogram(std::span<const double> values, int bins) {
  if (values.size() < 100)
    throw InsufficientDataError("histogram needs at least 100 samples, got " +
                                std::to_string(values.size()));
  if (bins < 1) throw ConfigError("histogram needs at least one bin");

  const double n = static_cast<double>(values.size());
  Histogram h;
  h.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double m2 = 0.0, m3 = 0.0;
  for (double v : values) {
    const double d = v - h.mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= n;
  m3 /= n;
  h.std = std::sqrt(m2);
  h.degenerate = !(h.std > 1e-12 * std::max(1.0, std::abs(h.mean)));

  if (h.degenerate) {
    // Zero spread: one unit-width bin centred on the value holds everything.
    h.std = 0.0;
    h.edges = {h.mean - 0.5, h.mean + 0.5};
    h.counts = {static_cast<std::int64_t>(values.size())};
    return h;
  }
  h.skewness = m3 / (m2 * h.std);

  h.counts.assign(static_cast<std::size_t>(bins), 0);
  const double lo = h.mean - 4.0 * h.std;
  const double width = 8.0 * h.std / bins;
  h.edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int i = 0; i <= bins; ++i) h.edges[i] = lo + width * i;
  for (double v : values) {
    const double pos = (v - lo) / width;
    if (pos < 0.0 || pos >= bins) {
      ++h.outside;
      continue;
    }
    ++h.counts[static_cast<std::size_t>(pos)];
  }
  return h;
}

namespace {
std::vector<double> ranks(std::span<const double> x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}
}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("spearman needs two equal-length series");
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace sgmlab
