#pragma once

#include "sgmlab/conformation.hpp"

#include <string>
#include <vector>

namespace sgmlab {

struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Conformation apply(const Conformation& c) const;
};

// Singular value decomposition of a 3x3 matrix by one-sided Jacobi
// rotations: a = u * diag(s) * v^T with s descending and u, v orthogonal.
struct Svd3 {
  Mat3 u;
  Vec3 s;
  Mat3 v;
};
Svd3 svd3(const Mat3& a);

// Proper rotation R and translation t minimising sum ||R p_i + t - q_i||^2.
RigidTransform kabsch_align(const Conformation& p, const Conformation& q);

// Root-mean-square deviation after optimal rigid superposition of `c` onto `c_hat`.
double rmsd(const Conformation& c, const Conformation& c_hat);

// Rows index the reference set, columns the generated set.
class RmsdMatrix {
 public:
  RmsdMatrix() = default;
  explicit RmsdMatrix(Eigen::MatrixXd values);

  Eigen::Index references() const { return values_.rows(); }
  Eigen::Index generated() const { return values_.cols(); }
  const Eigen::MatrixXd& values() const { return values_; }
  double operator()(Eigen::Index r, Eigen::Index g) const { return values_(r, g); }

 private:
  Eigen::MatrixXd values_;
};

RmsdMatrix pairwise_rmsd(const std::vector<Conformation>& generated,
                         const std::vector<Conformation>& reference);

// Fraction of reference rows with some entry strictly below delta.
double coverage(const RmsdMatrix& m, double delta);

// Mean over reference rows of the row minimum.
double matching(const RmsdMatrix& m);

struct MoleculeScore {
  std::string id;
  double cov;
  double mat;
};

struct EvalReport {
  double delta = 0.5;
  std::vector<MoleculeScore> molecules;
  double cov_mean = 0.0;
  double cov_median = 0.0;
  double mat_mean = 0.0;
  double mat_median = 0.0;
};

// `ids` may be empty, in which case molecules are numbered from 0.
EvalReport eval_report(const std::vector<RmsdMatrix>& per_molecule, double delta,
                       const std::vector<std::string>& ids = {});

double median(std::vector<double> v);

}  // namespace sgmlab
