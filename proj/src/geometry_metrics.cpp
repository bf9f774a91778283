#include "sgmlab/geometry_metrics.hpp"

#include "sgmlab/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace sgmlab {

Conformation RigidTransform::apply(const Conformation& c) const {
  Conformation out = c * rotation.transpose();
  out.rowwise() += translation.transpose();
  return out;
}

namespace {

// Unit vector orthogonal to `a` (|a| = 1).
Vec3 any_orthogonal(const Vec3& a) {
  const Vec3 trial = std::abs(a.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  return (trial - trial.dot(a) * a).normalized();
}

}  // namespace

Svd3 svd3(const Mat3& a) {
  Mat3 w = a;
  Mat3 v = Mat3::Identity();
  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        const double alpha = w.col(p).squaredNorm();
        const double beta = w.col(q).squaredNorm();
        const double gamma = w.col(p).dot(w.col(q));
        if (gamma == 0.0) continue;
        off = std::max(off, std::abs(gamma) / std::sqrt(alpha * beta));
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (Mat3* m : {&w, &v}) {
          const Vec3 cp = m->col(p);
          const Vec3 cq = m->col(q);
          m->col(p) = c * cp - s * cq;
          m->col(q) = s * cp + c * cq;
        }
      }
    }
    if (off < 1e-15) break;
  }

  std::array<int, 3> order{0, 1, 2};
  Vec3 norms(w.col(0).norm(), w.col(1).norm(), w.col(2).norm());
  std::sort(order.begin(), order.end(), [&](int i, int j) { return norms[i] > norms[j]; });

  Svd3 out;
  const double tiny = 1e-14 * std::max(1.0, norms.maxCoeff());
  int rank = 0;
  for (int k = 0; k < 3; ++k) {
    const int src = order[static_cast<std::size_t>(k)];
    out.s[k] = norms[src];
    out.v.col(k) = v.col(src);
    if (norms[src] > tiny) {
      out.u.col(k) = w.col(src) / norms[src];
      ++rank;
    }
  }
  // Complete u to an orthonormal basis where singular values vanish.
  if (rank == 0) out.u.col(0) = Vec3::UnitX();
  if (rank <= 1) out.u.col(1) = any_orthogonal(out.u.col(0));
  if (rank <= 2) out.u.col(2) = out.u.col(0).cross(out.u.col(1));
  for (int k = rank; k < 3; ++k) out.s[k] = 0.0;
  return out;
}

RigidTransform kabsch_align(const Conformation& p, const Conformation& q) {
  if (p.rows() != q.rows()) throw ShapeError("kabsch_align: atom counts differ");
  if (p.rows() < 1) throw ShapeError("kabsch_align: empty conformation");
  const Eigen::RowVector3d pc = centroid(p);
  const Eigen::RowVector3d qc = centroid(q);
  // Cross-covariance H = sum (p_i - pc)^T (q_i - qc); R = V diag(1,1,d) U^T.
  const Mat3 h = (p.rowwise() - pc).transpose() * (q.rowwise() - qc);
  const Svd3 svd = svd3(h);
  const double d = (svd.v * svd.u.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  const Mat3 r = svd.v * Eigen::Vector3d(1.0, 1.0, d).asDiagonal() * svd.u.transpose();
  return {r, qc.transpose() - r * pc.transpose()};
}

double rmsd(const Conformation& c, const Conformation& c_hat) {
  if (c.rows() != c_hat.rows()) throw ShapeError("rmsd: atom counts differ");
  if (c.rows() < 1) throw ShapeError("rmsd: empty conformation");
  const RigidTransform phi = kabsch_align(c, c_hat);
  const double ss = (phi.apply(c) - c_hat).squaredNorm();
  return std::sqrt(ss / static_cast<double>(c.rows()));
}

RmsdMatrix::RmsdMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
  if (values_.size() == 0) throw ConfigError("rmsd matrix is empty");
  if (!values_.allFinite() || (values_.array() < 0.0).any())
    throw DomainError("rmsd matrix entries must be finite and non-negative");
}

RmsdMatrix pairwise_rmsd(const std::vector<Conformation>& generated,
                         const std::vector<Conformation>& reference) {
  if (generated.empty() || reference.empty()) throw ConfigError("pairwise_rmsd needs non-empty sets");
  const auto n = reference.front().rows();
  for (const auto* set : {&generated, &reference})
    for (const auto& c : *set)
      if (c.rows() != n) throw ShapeError("pairwise_rmsd: conformers differ in atom count");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(reference.size()),
                    static_cast<Eigen::Index>(generated.size()));
  for (std::size_t r = 0; r < reference.size(); ++r)
    for (std::size_t g = 0; g < generated.size(); ++g)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(g)) = rmsd(reference[r], generated[g]);
  return RmsdMatrix(std::move(m));
}

double coverage(const RmsdMatrix& m, double delta) {
  if (!(delta > 0.0)) throw ConfigError("coverage threshold must be positive");
  Eigen::Index covered = 0;
  for (Eigen::Index r = 0; r < m.references(); ++r)
    if (m.values().row(r).minCoeff() < delta) ++covered;
  return static_cast<double>(covered) / static_cast<double>(m.references());
}

double matching(const RmsdMatrix& m) {
  return m.values().rowwise().minCoeff().mean();
}

double median(std::vector<double> v) {
  if (v.empty()) throw ConfigError("median of an empty list");
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

EvalReport eval_report(const std::vector<RmsdMatrix>& per_molecule, double delta,
                       const std::vector<std::string>& ids) {
  if (per_molecule.empty()) throw ConfigError("eval_report needs at least one molecule");
  if (!ids.empty() && ids.size() != per_molecule.size())
    throw ConfigError("eval_report: one id per molecule required");
  EvalReport rep;
  rep.delta = delta;
  std::vector<double> covs, mats;
  for (std::size_t i = 0; i < per_molecule.size(); ++i) {
    const double cov = coverage(per_molecule[i], delta);
    const double mat = matching(per_molecule[i]);
    rep.molecules.push_back({ids.empty() ? std::to_string(i) : ids[i], cov, mat});
    covs.push_back(cov);
    mats.push_back(mat);
  }
  const double n = static_cast<double>(covs.size());
  rep.cov_mean = std::accumulate(covs.begin(), covs.end(), 0.0) / n;
  rep.mat_mean = std::accumulate(mats.begin(), mats.end(), 0.0) / n;
  rep.cov_median = median(covs);
  rep.mat_median = median(mats);
  return rep;
}

}  // namespace sgmlab
