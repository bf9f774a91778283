#include "sgmlab/schedule.hpp"

#include "sgmlab/errors.hpp"

#include <cmath>
#include <string>

namespace sgmlab {

NoiseSchedule::NoiseSchedule(std::vector<double> sigmas) : sigmas_(std::move(sigmas)) {
  if (sigmas_.empty()) throw ConfigError("noise schedule needs at least one level");
  for (std::size_t i = 0; i < sigmas_.size(); ++i) {
    if (!(sigmas_[i] > 0.0) || !std::isfinite(sigmas_[i]))
      throw ConfigError("noise level " + std::to_string(i + 1) + " is not a positive number");
    if (i > 0 && !(sigmas_[i] < sigmas_[i - 1]))
      throw ConfigError("noise levels must be strictly descending");
  }
}

NoiseSchedule NoiseSchedule::geometric(double sigma_max, double sigma_min, int levels) {
  if (levels < 2) throw ConfigError("geometric schedule needs at least two levels");
  if (!(sigma_min > 0.0)) throw ConfigError("sigma_min must be positive");
  if (!(sigma_max > sigma_min)) throw ConfigError("sigma_max must exceed sigma_min");
  const double ratio = std::pow(sigma_min / sigma_max, 1.0 / (levels - 1));
  std::vector<double> s(static_cast<std::size_t>(levels));
  s.front() = sigma_max;
  for (int i = 1; i + 1 < levels; ++i) s[i] = sigma_max * std::pow(ratio, i);
  s.back() = sigma_min;
  return NoiseSchedule(std::move(s));
}

double NoiseSchedule::sigma(int level) const {
  if (level < 1 || level > levels())
    throw IndexError("noise level " + std::to_string(level) + " outside 1.." +
                     std::to_string(levels()));
  return sigmas_[static_cast<std::size_t>(level - 1)];
}

double NoiseSchedule::step_size(int level, double a) const {
  if (!(a > 0.0)) throw ConfigError("step size scale a must be positive");
  const double s = sigma(level);
  const double last = sigma_min();
  return a * (s * s) / (last * last);
}

}  // namespace sgmlab
