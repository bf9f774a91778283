#include "sgmlab/sampler.hpp"

#include "sgmlab/errors.hpp"

namespace sgmlab {

void SamplerConfig::validate() const {
  if (!(a > 0.0)) throw ConfigError("sampler step size a must be positive");
  if (steps_per_level < 1) throw ConfigError("steps per level must be at least 1");
  if (!std::isnan(init_scale) && !(init_scale >= 0.0))
    throw ConfigError("init_scale must be non-negative");
}

void anneal(const ScoreFunction& score, const NoiseSchedule& schedule, Conformation& x,
            int first_level, double a, int steps_per_level, const NoiseSource& noise) {
  if (first_level < 1 || first_level > schedule.levels())
    throw IndexError("start level " + std::to_string(first_level) + " outside 1.." +
                     std::to_string(schedule.levels()));
  if (steps_per_level < 1) throw ConfigError("steps per level must be at least 1");
  if (x.rows() != score.n_atoms()) throw ShapeError("conformation atom count does not match score");

  Conformation z = Conformation::Zero(x.rows(), 3);
  for (int t = first_level; t <= schedule.levels(); ++t) {
    const double sigma = schedule.sigma(t);
    const double alpha = schedule.step_size(t, a);
    const double noise_scale = std::sqrt(2.0 * alpha);
    for (int i = 1; i <= steps_per_level; ++i) {
      Conformation s = score.score(x, sigma);
      x += alpha * s;
      if (noise) {
        noise(t, i, z);
        x += noise_scale * z;
      }
      if (!x.allFinite()) throw SamplingError(t, i, "non-finite coordinates");
    }
  }
}

NoiseSource gaussian_noise(Rng& rng, bool com_free) {
  return [&rng, com_free](int, int, Conformation& z) {
    z = standard_normal(static_cast<int>(z.rows()), rng);
    if (com_free) remove_centroid(z);
  };
}

Conformation langevin_sample(const ScoreFunction& score, const NoiseSchedule& schedule,
                             const SamplerConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const double scale = std::isnan(cfg.init_scale) ? schedule.sigma_max() : cfg.init_scale;
  Conformation x = scale * standard_normal(score.n_atoms(), rng);
  if (score.com_free()) remove_centroid(x);
  anneal(score, schedule, x, 1, cfg.a, cfg.steps_per_level, gaussian_noise(rng, score.com_free()));
  return x;
}

std::vector<Conformation> langevin_sample_many(const ScoreFunction& score,
                                               const NoiseSchedule& schedule,
                                               const SamplerConfig& cfg, int count) {
  if (count < 0) throw ConfigError("sample count must be non-negative");
  std::vector<Conformation> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    SamplerConfig chain = cfg;
    chain.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(k));
    out.push_back(langevin_sample(score, schedule, chain));
  }
  return out;
}

Conformation deterministic_reverse(const ScoreFunction& score, const NoiseSchedule& schedule,
                                   const Conformation& start, int start_level, double a,
                                   int det_steps) {
  if (!(a > 0.0)) throw ConfigError("sampler step size a must be positive");
  if (det_steps < 1) throw ConfigError("det_steps must be at least 1");
  Conformation x = start;
  anneal(score, schedule, x, start_level, a, det_steps, nullptr);
  return x;
}

}  // namespace sgmlab
