#pragma once

#include "sgmlab/conformation.hpp"
#include "sgmlab/schedule.hpp"
#include "sgmlab/score_function.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace sgmlab {

struct BiasConfig {
  int samples_per_level = 500;
  int det_steps = 1;
  double a = 1e-5;
  std::uint64_t seed = 0;
  // Draw the start level uniformly per sample instead of probing every
  // level with equal counts. Total draws stay samples_per_level * L.
  bool uniform_levels = false;
  // Keep per-sample errors and signed per-coordinate residuals.
  bool keep_raw = false;

  void validate() const;
};

struct LevelBias {
  int level;
  double sigma;
  double mean_abs_bias;  // mean of ||C0 - C0_hat||_1 / n_atoms; 0 when n == 0
  std::int64_t n;
  std::vector<double> per_sample;       // filled when keep_raw
  std::vector<double> signed_residuals;  // C0 - C0_hat, every coordinate, when keep_raw
};

struct BiasReport {
  std::vector<LevelBias> levels;
  double global_mean = 0.0;  // n-weighted average of the per-level means
};

// Noises dataset conformers to each level, runs the deterministic reverse
// and accumulates the per-atom L1 reconstruction error. Sample k at level t
// draws from its own stream derive_seed(seed, t, k), so the result does not
// depend on evaluation order.
BiasReport estimate_bias(const ScoreFunction& score, const NoiseSchedule& schedule,
                         const std::vector<Conformation>& dataset, const BiasConfig& cfg);

struct Histogram {
  std::vector<double> edges;  // bins + 1 edges spanning mean +- 4 std
  std::vector<std::int64_t> counts;
  std::int64_t outside = 0;  // samples beyond +-4 std
  double mean = 0.0;
  double std = 0.0;
  double skewness = 0.0;
  bool degenerate = false;  // zero spread: one occupied bin, skewness 0
};

Histogram bias_histogram(std::span<const double> values, int bins = 40);

// Spearman rank correlation (average ranks for ties).
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace sgmlab
