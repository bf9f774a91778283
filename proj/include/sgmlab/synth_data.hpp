#pragma once

#include "sgmlab/conformation.hpp"
#include "sgmlab/score_function.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace sgmlab {

// Mixture of von Mises densities over one torsion angle (degrees).
struct CircularMixture {
  std::vector<double> means_deg{-60.0, 60.0, 180.0};
  std::vector<double> concentrations{20.0, 20.0, 20.0};
  std::vector<double> weights{0.3, 0.3, 0.4};

  void validate() const;
  double density(double angle_deg) const;  // per radian
  bool operator==(const CircularMixture&) const = default;
};

// Linear chain of beads with fixed bond lengths and angles; every dihedral
// along the chain is a rotatable bond with its own circular mixture.
struct MoleculeTemplate {
  int n_atoms = 6;
  double bond_length = 1.5;
  double bond_angle_deg = 112.0;
  std::vector<CircularMixture> torsions;

  // Template with `n_atoms - 3` copies of the default three-mode mixture.
  static MoleculeTemplate chain(int n_atoms);
  int torsion_count() const { return n_atoms >= 3 ? n_atoms - 3 : 0; }
  void validate() const;
  bool operator==(const MoleculeTemplate&) const = default;
};

// A molecule: its template, provenance seed and conformers.
struct ConformerSet {
  std::string id;
  MoleculeTemplate tmpl;
  std::uint64_t seed = 0;
  std::vector<Conformation> conformers;
};

// Von Mises draw (Best-Fisher) about `mean_rad` with concentration kappa.
double sample_von_mises(double mean_rad, double kappa, Rng& rng);

// Wraps into (-180, 180].
double wrap_degrees(double deg);

std::vector<double> sample_torsions(const MoleculeTemplate& tmpl, Rng& rng);

// Natural-extension-reference-frame placement, centred on the origin.
Conformation build_coordinates(const MoleculeTemplate& tmpl, const std::vector<double>& torsions_deg);

// Internal coordinates recomputed from Cartesian positions along the chain.
double distance(const Vec3& a, const Vec3& b);
double bond_angle_deg(const Vec3& a, const Vec3& b, const Vec3& c);
// Signed dihedral a-b-c-d in degrees, (-180, 180]. Throws
// DegenerateGeometryError when either a-b-c or b-c-d is collinear.
double dihedral_deg(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);

struct InternalCoordinates {
  std::vector<double> bond_lengths;
  std::vector<double> bond_angles_deg;
  std::vector<double> torsions_deg;
};
InternalCoordinates internal_coordinates(const Conformation& c);

// Variant v draws from its own stream derive_seed(seed, v); ids are "mol<v>".
std::vector<ConformerSet> gen_dataset(const MoleculeTemplate& tmpl, int n_variants,
                                      int conformers_each, std::uint64_t seed);

// All conformers of all sets, in order.
std::vector<Conformation> pool_conformers(const std::vector<ConformerSet>& sets);

// --- analytic Gaussian mixtures -------------------------------------------

struct GaussianMixture {
  std::vector<Eigen::VectorXd> means;
  std::vector<double> stds;  // isotropic std per component
  std::vector<double> weights;

  int dim() const { return means.empty() ? 0 : static_cast<int>(means.front().size()); }
  void validate() const;
};

// Score of the mixture convolved with N(0, sigma^2 I).
Eigen::VectorXd gmm_score(const GaussianMixture& mix, const Eigen::VectorXd& x, double sigma);
double gmm_log_density(const GaussianMixture& mix, const Eigen::VectorXd& x, double sigma);

// Adapts a mixture over 3n-dimensional points to the ScoreFunction interface.
class GaussianMixtureScore final : public ScoreFunction {
 public:
  explicit GaussianMixtureScore(GaussianMixture mix);
  int n_atoms() const override { return mix_.dim() / 3; }
  bool com_free() const override { return false; }
  Conformation score(const Conformation& c, double sigma) const override;

 private:
  GaussianMixture mix_;
};

// Point mass at `c` (a zero-width single component).
GaussianMixture point_mass(const Conformation& c);

// --- toy ensemble properties -----------------------------------------------

enum class Property { kRadiusOfGyration, kEndToEnd, kTorsionEnergy };
enum class Statistic { kMean, kMin, kMax };

std::string to_string(Property p);
std::string to_string(Statistic s);
Property property_from_string(const std::string& name);
Statistic statistic_from_string(const std::string& name);

double toy_property(const Conformation& c, const MoleculeTemplate& tmpl, Property which);

// Per-statistic |stat(generated) - stat(reference)| for one molecule.
std::map<Statistic, double> property_abs_errors(const std::vector<Conformation>& generated,
                                                const std::vector<Conformation>& reference,
                                                const MoleculeTemplate& tmpl, Property which,
                                                const std::vector<Statistic>& stats);

// Mean over molecules of property_abs_errors.
std::map<Statistic, double> ensemble_property_mae(
    const std::vector<std::vector<Conformation>>& generated,
    const std::vector<std::vector<Conformation>>& reference, const MoleculeTemplate& tmpl,
    Property which, const std::vector<Statistic>& stats);

}  // namespace sgmlab
