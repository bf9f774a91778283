#pragma once

#include "sgmlab/conformation.hpp"
#include "sgmlab/nn/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <string>

namespace testing {

// Central differences of f over every scalar in `params`, independent of the
// library's own checker.
inline sgmlab::nn::ParamSet numeric_grad(sgmlab::nn::ParamSet& params,
                                         const std::function<double()>& f, double h = 1e-5) {
  sgmlab::nn::ParamSet g = sgmlab::nn::zeros_like(params);
  auto probe = [&](double& slot) {
    const double keep = slot;
    slot = keep + h;
    const double up = f();
    slot = keep - h;
    const double down = f();
    slot = keep;
    return (up - down) / (2 * h);
  };
  for (std::size_t k = 0; k < params.size(); ++k) {
    for (Eigen::Index i = 0; i < params[k].weight.size(); ++i)
      g[k].weight.data()[i] = probe(params[k].weight.data()[i]);
    for (Eigen::Index i = 0; i < params[k].bias.size(); ++i)
      g[k].bias.data()[i] = probe(params[k].bias.data()[i]);
  }
  return g;
}

inline double max_rel(const sgmlab::nn::ParamSet& a, const sgmlab::nn::ParamSet& b) {
  double worst = 0.0;
  auto scan = [&](const double* x, const double* y, Eigen::Index n) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = std::abs(x[i] - y[i]);
      worst = std::max(worst, d / std::max({std::abs(x[i]), std::abs(y[i]), 1e-12}));
    }
  };
  for (std::size_t k = 0; k < a.size(); ++k) {
    scan(a[k].weight.data(), b[k].weight.data(), a[k].weight.size());
    scan(a[k].bias.data(), b[k].bias.data(), a[k].bias.size());
  }
  return worst;
}

// Fills every parameter (including the zero-initialised output layer).
inline void randomize(sgmlab::nn::ParamSet& p, std::uint64_t seed, double scale = 0.5) {
  sgmlab::Rng rng(seed);
  std::normal_distribution<double> n(0.0, scale);
  for (auto& l : p) {
    for (Eigen::Index i = 0; i < l.weight.size(); ++i) l.weight.data()[i] = n(rng);
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias.data()[i] = n(rng);
  }
}

inline sgmlab::Conformation random_conformation(int n, sgmlab::Rng& rng, double scale = 1.0) {
  return scale * sgmlab::standard_normal(n, rng);
}

// Uniform random proper rotation (from a normalised random quaternion).
inline sgmlab::Mat3 random_rotation(sgmlab::Rng& rng) {
  std::normal_distribution<double> n;
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

inline sgmlab::Conformation rigid(const sgmlab::Conformation& c, const sgmlab::Mat3& r,
                                  const sgmlab::Vec3& t) {
  sgmlab::Conformation out(c.rows(), 3);
  for (Eigen::Index i = 0; i < c.rows(); ++i) out.row(i) = (r * c.row(i).transpose() + t).transpose();
  return out;
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("sgmlab_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace testing
