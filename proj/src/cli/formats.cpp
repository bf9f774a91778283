#include "sgmlab/cli/formats.hpp"

#include "sgmlab/errors.hpp"
#include "sgmlab/io.hpp"

#include <cmath>
#include <sstream>

namespace sgmlab::cli {

using nlohmann::json;
using io::format_double;

json template_to_json(const MoleculeTemplate& t) {
  json torsions = json::array();
  for (const auto& m : t.torsions)
    torsions.push_back({{"means_deg", m.means_deg},
                        {"concentrations", m.concentrations},
                        {"weights", m.weights}});
  return {{"n_atoms", t.n_atoms},
          {"bond_length", t.bond_length},
          {"bond_angle_deg", t.bond_angle_deg},
          {"torsions", torsions}};
}

MoleculeTemplate template_from_json(const json& j) {
  MoleculeTemplate t;
  t.n_atoms = j.at("n_atoms").get<int>();
  t.bond_length = j.at("bond_length").get<double>();
  t.bond_angle_deg = j.at("bond_angle_deg").get<double>();
  for (const auto& m : j.at("torsions")) {
    CircularMixture mix;
    mix.means_deg = m.at("means_deg").get<std::vector<double>>();
    mix.concentrations = m.at("concentrations").get<std::vector<double>>();
    mix.weights = m.at("weights").get<std::vector<double>>();
    t.torsions.push_back(std::move(mix));
  }
  t.validate();
  return t;
}

json conformer_set_to_json(const ConformerSet& set) {
  json confs = json::array();
  for (const auto& c : set.conformers) {
    json atoms = json::array();
    for (Eigen::Index i = 0; i < c.rows(); ++i) atoms.push_back({c(i, 0), c(i, 1), c(i, 2)});
    confs.push_back(std::move(atoms));
  }
  json doc;
  doc["schema_version"] = kDatasetSchemaVersion;
  doc["id"] = set.id;
  doc["seed"] = set.seed;
  doc["template"] = template_to_json(set.tmpl);
  doc["conformers"] = std::move(confs);
  return doc;
}

ConformerSet conformer_set_from_json(const json& doc) {
  if (!doc.is_object() || doc.value("schema_version", -1) != kDatasetSchemaVersion)
    throw DomainError("dataset record has missing or unsupported schema_version");
  ConformerSet set;
  set.id = doc.at("id").get<std::string>();
  set.seed = doc.at("seed").get<std::uint64_t>();
  set.tmpl = template_from_json(doc.at("template"));
  for (const auto& atoms : doc.at("conformers")) {
    Conformation c(static_cast<Eigen::Index>(atoms.size()), 3);
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      if (atoms[i].size() != 3) throw DomainError("atom record in '" + set.id + "' is not a 3-vector");
      for (std::size_t k = 0; k < 3; ++k) c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = atoms[i][k].get<double>();
    }
    if (c.rows() != set.tmpl.n_atoms)
      throw DomainError("conformer in '" + set.id + "' does not match its template atom count");
    set.conformers.push_back(std::move(c));
  }
  return set;
}

std::string dataset_to_jsonl(const std::vector<ConformerSet>& sets) {
  std::string out;
  for (const auto& s : sets) {
    out += conformer_set_to_json(s).dump();
    out += '\n';
  }
  return out;
}

std::vector<ConformerSet> dataset_from_jsonl(const std::string& text, const std::string& origin) {
  std::vector<ConformerSet> sets;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const json doc = json::parse(line, nullptr, false);
    if (doc.is_discarded())
      throw DomainError(origin + ":" + std::to_string(lineno) + ": malformed dataset record");
    try {
      sets.push_back(conformer_set_from_json(doc));
    } catch (const json::exception& e) {
      throw DomainError(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (sets.empty()) throw DomainError("dataset '" + origin + "' contains no molecules");
  return sets;
}

std::vector<ConformerSet> read_dataset(const std::filesystem::path& path) {
  return dataset_from_jsonl(io::read_file(path), path.string());
}

namespace {
std::string header_line(const std::string& digest) { return "# manifest: " + digest + "\n"; }
}  // namespace

std::string bias_csv(const BiasReport& report, const std::string& manifest_digest) {
  std::string out = header_line(manifest_digest) + "t,sigma,mean_abs_bias,n\n";
  for (const auto& l : report.levels)
    out += std::to_string(l.level) + "," + format_double(l.sigma) + "," +
           format_double(l.mean_abs_bias) + "," + std::to_string(l.n) + "\n";
  return out;
}

std::string histogram_csv(const Histogram& h, const std::string& manifest_digest) {
  std::string out = header_line(manifest_digest);
  out += "# mean=" + format_double(h.mean) + " std=" + format_double(h.std) +
         " skewness=" + format_double(h.skewness) + " outside=" + std::to_string(h.outside) +
         (h.degenerate ? " degenerate" : "") + "\n";
  out += "bin_left,bin_right,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i)
    out += format_double(h.edges[i]) + "," + format_double(h.edges[i + 1]) + "," +
           std::to_string(h.counts[i]) + "\n";
  return out;
}

std::string eval_csv(const EvalReport& report, const std::string& manifest_digest) {
  std::string out = header_line(manifest_digest);
  out += "# delta=" + format_double(report.delta) + "\n";
  out += "molecule_id,cov,mat\n";
  for (const auto& m : report.molecules)
    out += m.id + "," + format_double(m.cov) + "," + format_double(m.mat) + "\n";
  out += "mean," + format_double(report.cov_mean) + "," + format_double(report.mat_mean) + "\n";
  out += "median," + format_double(report.cov_median) + "," + format_double(report.mat_median) + "\n";
  return out;
}

std::string train_log_csv(const TrainLog& log, const std::string& manifest_digest) {
  std::string out = header_line(manifest_digest) + "step,loss,seconds\n";
  for (const auto& r : log.records)
    out += std::to_string(r.step) + "," + format_double(r.loss) + "," + format_double(r.seconds) + "\n";
  return out;
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw DomainError("csv has no column '" + name + "'");
}

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (t.header.empty())
      t.header = std::move(cells);
    else
      t.rows.push_back(std::move(cells));
  }
  return t;
}

}  // namespace sgmlab::cli
