#pragma once

#include <vector>

namespace sgmlab {

// Noise levels sigma_1 > sigma_2 > ... > sigma_L > 0. Levels are 1-based
// throughout the public API; level 1 is the noisiest.
class NoiseSchedule {
 public:
  NoiseSchedule() = default;
  // Takes an explicit, strictly descending, positive list.
  explicit NoiseSchedule(std::vector<double> sigmas);

  // Geometric grid from sigma_max down to sigma_min with both ends exact.
  static NoiseSchedule geometric(double sigma_max, double sigma_min, int levels);

  int levels() const { return static_cast<int>(sigmas_.size()); }
  double sigma(int level) const;
  double sigma_max() const { return sigmas_.front(); }
  double sigma_min() const { return sigmas_.back(); }
  const std::vector<double>& sigmas() const { return sigmas_; }

  // Langevin step a * sigma_t^2 / sigma_L^2; equals a at the last level.
  double step_size(int level, double a) const;

  bool operator==(const NoiseSchedule&) const = default;

 private:
  std::vector<double> sigmas_;
};

}  // namespace sgmlab
