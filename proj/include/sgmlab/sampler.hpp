#pragma once

#include "sgmlab/conformation.hpp"
#include "sgmlab/schedule.hpp"
#include "sgmlab/score_function.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

namespace sgmlab {

struct SamplerConfig {
  double a = 1e-5;  // step size at the last (smallest) noise level
  int steps_per_level = 50;
  std::uint64_t seed = 0;
  // Std of the prior draw; NaN means sigma_1 of the schedule.
  double init_scale = std::numeric_limits<double>::quiet_NaN();

  void validate() const;
};

// Source of the Langevin noise z. Receives the (1-based) level and the
// (1-based) iteration and fills `z` (already shaped n x 3).
using NoiseSource = std::function<void(int level, int iteration, Conformation& z)>;

// Level loop shared by both samplers: for t = first_level..L, alpha_t =
// a sigma_t^2 / sigma_L^2, and `steps_per_level` updates
//   x <- x + alpha_t s(x, sigma_t) + sqrt(2 alpha_t) z.
// A null `noise` drops the stochastic term entirely.
void anneal(const ScoreFunction& score, const NoiseSchedule& schedule, Conformation& x,
            int first_level, double a, int steps_per_level, const NoiseSource& noise);

// Standard-normal noise from `rng`, centroid-projected when `com_free`.
NoiseSource gaussian_noise(Rng& rng, bool com_free);

// One annealed Langevin chain from N(0, init_scale^2 I).
Conformation langevin_sample(const ScoreFunction& score, const NoiseSchedule& schedule,
                             const SamplerConfig& cfg);

// `count` chains; chain k uses seed derive_seed(cfg.seed, k).
std::vector<Conformation> langevin_sample_many(const ScoreFunction& score,
                                               const NoiseSchedule& schedule,
                                               const SamplerConfig& cfg, int count);

// Noise-free reverse from `start` at `start_level` down through sigma_L
// with `det_steps` drift-only updates per level.
Conformation deterministic_reverse(const ScoreFunction& score, const NoiseSchedule& schedule,
                                   const Conformation& start, int start_level, double a,
                                   int det_steps = 1);

}  // namespace sgmlab
