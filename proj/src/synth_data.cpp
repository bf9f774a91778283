#include "sgmlab/synth_data.hpp"

#include "sgmlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace sgmlab {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

// I0(kappa) * exp(-kappa), stable for large kappa.
double scaled_bessel_i0(double kappa) {
  if (kappa < 500.0) return std::cyl_bessel_i(0.0, kappa) * std::exp(-kappa);
  const double inv = 1.0 / kappa;
  return (1.0 + inv / 8.0 + 9.0 * inv * inv / 128.0) / std::sqrt(2.0 * kPi * kappa);
}
}  // namespace

// --- templates -------------------------------------------------------------

void CircularMixture::validate() const {
  if (means_deg.empty()) throw ConfigError("torsion mixture has no components");
  if (concentrations.size() != means_deg.size() || weights.size() != means_deg.size())
    throw ConfigError("torsion mixture component lists differ in length");
  double total = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (!(weights[k] >= 0.0)) throw ConfigError("torsion mixture weights must be non-negative");
    if (!(concentrations[k] > 0.0)) throw ConfigError("torsion concentrations must be positive");
    total += weights[k];
  }
  if (std::abs(total - 1.0) > 1e-12) throw ConfigError("torsion mixture weights must sum to 1");
}

double CircularMixture::density(double angle_deg) const {
  double p = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const double kappa = concentrations[k];
    const double c = std::cos((angle_deg - means_deg[k]) * kDeg);
    p += weights[k] * std::exp(kappa * (c - 1.0)) / (2.0 * kPi * scaled_bessel_i0(kappa));
  }
  return p;
}

MoleculeTemplate MoleculeTemplate::chain(int n_atoms) {
  MoleculeTemplate t;
  t.n_atoms = n_atoms;
  t.torsions.assign(static_cast<std::size_t>(t.torsion_count()), CircularMixture{});
  t.validate();
  return t;
}

void MoleculeTemplate::validate() const {
  if (n_atoms < 2) throw ConfigError("molecule template needs at least two atoms");
  if (!(bond_length > 0.0)) throw ConfigError("bond length must be positive");
  if (!(bond_angle_deg > 0.0 && bond_angle_deg < 180.0))
    throw ConfigError("bond angle must lie strictly between 0 and 180 degrees");
  if (static_cast<int>(torsions.size()) != torsion_count())
    throw ConfigError("template needs one torsion mixture per rotatable bond (" +
                      std::to_string(torsion_count()) + ")");
  for (const auto& m : torsions) m.validate();
}

// --- sampling --------------------------------------------------------------

double wrap_degrees(double deg) {
  double x = std::fmod(deg, 360.0);
  if (x <= -180.0) x += 360.0;
  if (x > 180.0) x -= 360.0;
  return x;
}

double sample_von_mises(double mean_rad, double kappa, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (kappa < 1e-8) return mean_rad + kPi * (2.0 * unit(rng) - 1.0);
  if (kappa > 1e6) {
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(kappa));
    return mean_rad + normal(rng);
  }
  const double s = 0.5 / kappa;
  const double r = s + std::sqrt(1.0 + s * s);
  double w = 0.0;
  while (true) {
    const double z = std::cos(kPi * unit(rng));
    w = (1.0 + r * z) / (r + z);
    const double y = kappa * (r - w);
    const double v = unit(rng);
    if (y * (2.0 - y) - v >= 0.0 || std::log(y / v) + 1.0 - y >= 0.0) break;
  }
  const double angle = std::acos(std::clamp(w, -1.0, 1.0));
  return mean_rad + (unit(rng) < 0.5 ? -angle : angle);
}

std::vector<double> sample_torsions(const MoleculeTemplate& tmpl, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> out;
  out.reserve(tmpl.torsions.size());
  for (const auto& mix : tmpl.torsions) {
    const double u = unit(rng);
    std::size_t k = 0;
    double cum = mix.weights[0];
    while (u >= cum && k + 1 < mix.weights.size()) cum += mix.weights[++k];
    const double rad = sample_von_mises(mix.means_deg[k] * kDeg, mix.concentrations[k], rng);
    out.push_back(wrap_degrees(rad / kDeg));
  }
  return out;
}

// --- coordinates -----------------------------------------------------------

Conformation build_coordinates(const MoleculeTemplate& tmpl, const std::vector<double>& torsions_deg) {
  tmpl.validate();
  if (static_cast<int>(torsions_deg.size()) != tmpl.torsion_count())
    throw ShapeError("expected " + std::to_string(tmpl.torsion_count()) + " torsions, got " +
                     std::to_string(torsions_deg.size()));
  const double len = tmpl.bond_length;
  const double theta = tmpl.bond_angle_deg * kDeg;
  Conformation c = Conformation::Zero(tmpl.n_atoms, 3);
  c.row(1) << len, 0.0, 0.0;
  if (tmpl.n_atoms > 2) c.row(2) = c.row(1) + len * Eigen::RowVector3d(-std::cos(theta), std::sin(theta), 0.0);
  for (int k = 3; k < tmpl.n_atoms; ++k) {
    const Vec3 a = c.row(k - 3).transpose();
    const Vec3 b = c.row(k - 2).transpose();
    const Vec3 p = c.row(k - 1).transpose();
    const double tau = torsions_deg[static_cast<std::size_t>(k - 3)] * kDeg;
    const Vec3 bc = (p - b).normalized();
    const Vec3 n = (b - a).cross(bc).normalized();
    const Vec3 m = n.cross(bc);
    const Vec3 d = p + len * (-std::cos(theta) * bc + std::sin(theta) * std::cos(tau) * m +
                              std::sin(theta) * std::sin(tau) * n);
    c.row(k) = d.transpose();
  }
  remove_centroid(c);
  return c;
}

double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

double bond_angle_deg(const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 u = a - b;
  const Vec3 v = c - b;
  return std::atan2(u.cross(v).norm(), u.dot(v)) / kDeg;
}

double dihedral_deg(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  const Vec3 b1 = b - a;
  const Vec3 b2 = c - b;
  const Vec3 b3 = d - c;
  const Vec3 n1 = b1.cross(b2);
  const Vec3 n2 = b2.cross(b3);
  const double scale = b2.norm();
  if (n1.norm() <= 1e-10 * b1.norm() * scale || n2.norm() <= 1e-10 * b3.norm() * scale ||
      scale == 0.0)
    throw DegenerateGeometryError("dihedral undefined for collinear atoms");
  const double y = scale * b1.dot(n2);
  const double x = n1.dot(n2);
  return wrap_degrees(std::atan2(y, x) / kDeg);
}

InternalCoordinates internal_coordinates(const Conformation& c) {
  InternalCoordinates ic;
  const auto row = [&](Eigen::Index i) -> Vec3 { return c.row(i).transpose(); };
  for (Eigen::Index i = 1; i < c.rows(); ++i) ic.bond_lengths.push_back(distance(row(i - 1), row(i)));
  for (Eigen::Index i = 2; i < c.rows(); ++i)
    ic.bond_angles_deg.push_back(bond_angle_deg(row(i - 2), row(i - 1), row(i)));
  for (Eigen::Index i = 3; i < c.rows(); ++i)
    ic.torsions_deg.push_back(dihedral_deg(row(i - 3), row(i - 2), row(i - 1), row(i)));
  return ic;
}

std::vector<ConformerSet> gen_dataset(const MoleculeTemplate& tmpl, int n_variants,
                                      int conformers_each, std::uint64_t seed) {
  tmpl.validate();
  if (n_variants < 1 || conformers_each < 1)
    throw ConfigError("gen_dataset needs at least one molecule and one conformer");
  std::vector<ConformerSet> out;
  out.reserve(static_cast<std::size_t>(n_variants));
  for (int v = 0; v < n_variants; ++v) {
    ConformerSet set;
    set.id = "mol" + std::to_string(v);
    set.tmpl = tmpl;
    set.seed = derive_seed(seed, static_cast<std::uint64_t>(v));
    Rng rng(set.seed);
    for (int k = 0; k < conformers_each; ++k)
      set.conformers.push_back(build_coordinates(tmpl, sample_torsions(tmpl, rng)));
    out.push_back(std::move(set));
  }
  return out;
}

std::vector<Conformation> pool_conformers(const std::vector<ConformerSet>& sets) {
  std::vector<Conformation> out;
  for (const auto& s : sets) out.insert(out.end(), s.conformers.begin(), s.conformers.end());
  return out;
}

// --- Gaussian mixtures -----------------------------------------------------

void GaussianMixture::validate() const {
  if (means.empty()) throw ConfigError("mixture has no components");
  if (stds.size() != means.size() || weights.size() != means.size())
    throw ConfigError("mixture component lists differ in length");
  double total = 0.0;
  for (std::size_t k = 0; k < means.size(); ++k) {
    if (means[k].size() != means.front().size()) throw ShapeError("mixture means differ in dimension");
    if (!(stds[k] >= 0.0)) throw ConfigError("mixture stds must be non-negative");
    if (!(weights[k] > 0.0)) throw ConfigError("mixture weights must be positive");
    total += weights[k];
  }
  if (std::abs(total - 1.0) > 1e-12) throw ConfigError("mixture weights must sum to 1");
}

namespace {

struct Responsibilities {
  std::vector<double> log_terms;  // log w_k + log N_k(x)
  std::vector<double> variances;
  double log_sum;
};

Responsibilities responsibilities(const GaussianMixture& mix, const Eigen::VectorXd& x, double sigma) {
  if (x.size() != mix.dim()) throw ShapeError("point dimension does not match mixture");
  Responsibilities r;
  const double d = static_cast<double>(x.size());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < mix.means.size(); ++k) {
    const double var = mix.stds[k] * mix.stds[k] + sigma * sigma;
    if (!(var > 0.0)) throw DomainError("mixture component has zero variance at sigma = 0");
    const double lt = std::log(mix.weights[k]) - (x - mix.means[k]).squaredNorm() / (2.0 * var) -
                      0.5 * d * std::log(2.0 * kPi * var);
    r.variances.push_back(var);
    r.log_terms.push_back(lt);
    top = std::max(top, lt);
  }
  double acc = 0.0;
  for (double lt : r.log_terms) acc += std::exp(lt - top);
  r.log_sum = top + std::log(acc);
  return r;
}

}  // namespace

Eigen::VectorXd gmm_score(const GaussianMixture& mix, const Eigen::VectorXd& x, double sigma) {
  const auto r = responsibilities(mix, x, sigma);
  Eigen::VectorXd s = Eigen::VectorXd::Zero(x.size());
  for (std::size_t k = 0; k < mix.means.size(); ++k) {
    const double resp = std::exp(r.log_terms[k] - r.log_sum);
    s -= resp * (x - mix.means[k]) / r.variances[k];
  }
  return s;
}

double gmm_log_density(const GaussianMixture& mix, const Eigen::VectorXd& x, double sigma) {
  return responsibilities(mix, x, sigma).log_sum;
}

GaussianMixtureScore::GaussianMixtureScore(GaussianMixture mix) : mix_(std::move(mix)) {
  mix_.validate();
  if (mix_.dim() % 3 != 0) throw ShapeError("mixture dimension must be a multiple of 3");
}

Conformation GaussianMixtureScore::score(const Conformation& c, double sigma) const {
  return from_flat(gmm_score(mix_, flat(c), sigma));
}

GaussianMixture point_mass(const Conformation& c) {
  return GaussianMixture{{Eigen::VectorXd(flat(c))}, {0.0}, {1.0}};
}

// --- properties ------------------------------------------------------------

std::string to_string(Property p) {
  switch (p) {
    case Property::kRadiusOfGyration: return "rg";
    case Property::kEndToEnd: return "end_to_end";
    case Property::kTorsionEnergy: return "torsion_energy";
  }
  return "unknown";
}

std::string to_string(Statistic s) {
  switch (s) {
    case Statistic::kMean: return "mean";
    case Statistic::kMin: return "min";
    case Statistic::kMax: return "max";
  }
  return "unknown";
}

Property property_from_string(const std::string& name) {
  if (name == "rg") return Property::kRadiusOfGyration;
  if (name == "end_to_end") return Property::kEndToEnd;
  if (name == "torsion_energy") return Property::kTorsionEnergy;
  throw ConfigError("unknown property '" + name + "'");
}

Statistic statistic_from_string(const std::string& name) {
  if (name == "mean") return Statistic::kMean;
  if (name == "min") return Statistic::kMin;
  if (name == "max") return Statistic::kMax;
  throw ConfigError("unknown statistic '" + name + "'");
}

double toy_property(const Conformation& c, const MoleculeTemplate& tmpl, Property which) {
  if (c.rows() != tmpl.n_atoms) throw ShapeError("conformation does not match template atom count");
  switch (which) {
    case Property::kRadiusOfGyration:
      return std::sqrt((c.rowwise() - centroid(c)).rowwise().squaredNorm().mean());
    case Property::kEndToEnd:
      return (c.row(0) - c.row(c.rows() - 1)).norm();
    case Property::kTorsionEnergy: {
      double e = 0.0;
      for (int j = 0; j < tmpl.torsion_count(); ++j) {
        const double tau = dihedral_deg(c.row(j).transpose(), c.row(j + 1).transpose(),
                                        c.row(j + 2).transpose(), c.row(j + 3).transpose());
        e -= std::log(tmpl.torsions[static_cast<std::size_t>(j)].density(tau));
      }
      return e;
    }
  }
  return 0.0;
}

std::map<Statistic, double> property_abs_errors(const std::vector<Conformation>& generated,
                                                const std::vector<Conformation>& reference,
                                                const MoleculeTemplate& tmpl, Property which,
                                                const std::vector<Statistic>& stats) {
  if (generated.empty() || reference.empty()) throw ConfigError("property comparison needs non-empty sets");
  auto values = [&](const std::vector<Conformation>& set) {
    std::vector<double> v;
    v.reserve(set.size());
    for (const auto& c : set) v.push_back(toy_property(c, tmpl, which));
    return v;
  };
  auto stat = [](const std::vector<double>& v, Statistic s) {
    switch (s) {
      case Statistic::kMean: return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
      case Statistic::kMin: return *std::min_element(v.begin(), v.end());
      case Statistic::kMax: return *std::max_element(v.begin(), v.end());
    }
    return 0.0;
  };
  const auto g = values(generated);
  const auto r = values(reference);
  std::map<Statistic, double> out;
  for (Statistic s : stats) out[s] = std::abs(stat(g, s) - stat(r, s));
  return out;
}

std::map<Statistic, double> ensemble_property_mae(
    const std::vector<std::vector<Conformation>>& generated,
    const std::vector<std::vector<Conformation>>& reference, const MoleculeTemplate& tmpl,
    Property which, const std::vector<Statistic>& stats) {
  if (generated.empty() || generated.size() != reference.size())
    throw ConfigError("ensemble_property_mae needs matching, non-empty molecule lists");
  std::map<Statistic, double> sum;
  for (std::size_t i = 0; i < generated.size(); ++i)
    for (const auto& [s, v] : property_abs_errors(generated[i], reference[i], tmpl, which, stats))
      sum[s] += v;
  for (auto& [s, v] : sum) v /= static_cast<double>(generated.size());
  return sum;
}

}  // namespace sgmlab
