#include "sgmlab/conformation.hpp"

namespace sgmlab {

Eigen::RowVector3d centroid(const Conformation& c) {
  if (c.rows() == 0) return Eigen::RowVector3d::Zero();
  return c.colwise().mean();
}

void remove_centroid(Conformation& c) {
  if (c.rows() == 0) return;
  const Eigen::RowVector3d mean = c.colwise().mean();
  c.rowwise() -= mean;
}

Conformation centered(const Conformation& c) {
  Conformation out = c;
  remove_centroid(out);
  return out;
}

Conformation from_flat(const Eigen::VectorXd& v) {
  Conformation c(v.size() / 3, 3);
  flat(c) = v;
  return c;
}

Conformation standard_normal(int n_atoms, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Conformation c(n_atoms, 3);
  for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = normal(rng);
  return c;
}

namespace {
std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ b);
}

bool all_finite(const Conformation& c) { return c.allFinite(); }

}  // namespace sgmlab
