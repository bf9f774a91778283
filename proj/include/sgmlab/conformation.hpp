#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/LU>

#include <cstdint>
#include <random>
#include <vector>

namespace sgmlab {

// n_atoms x 3 coordinates, row-major so a conformation flattens to
// [x0 y0 z0 x1 y1 z1 ...].
using Conformation = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

using Rng = std::mt19937_64;

Eigen::RowVector3d centroid(const Conformation& c);

// Subtracts the per-axis mean in place.
void remove_centroid(Conformation& c);

Conformation centered(const Conformation& c);

// Flattened view in atom-major order.
inline Eigen::Map<const Eigen::VectorXd> flat(const Conformation& c) {
  return {c.data(), c.size()};
}
inline Eigen::Map<Eigen::VectorXd> flat(Conformation& c) { return {c.data(), c.size()}; }

Conformation from_flat(const Eigen::VectorXd& v);

// Standard-normal draw of shape n x 3.
Conformation standard_normal(int n_atoms, Rng& rng);

// Deterministic 64-bit seed derivation (splitmix64 finalizer over the
// parts), used to give every chain / sample / variant its own stream.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

bool all_finite(const Conformation& c);

}  // namespace sgmlab
