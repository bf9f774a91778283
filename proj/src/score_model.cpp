#include "sgmlab/score_model.hpp"

#include "sgmlab/errors.hpp"
#include "sgmlab/io.hpp"

#include <cmath>

namespace sgmlab {

using nlohmann::json;

ScoreModel::ScoreModel(nn::Mlp net, int n_atoms, NoiseSchedule schedule, bool center_input)
    : net_(std::move(net)),
      n_atoms_(n_atoms),
      schedule_(std::move(schedule)),
      center_input_(center_input) {
  if (n_atoms_ < 1) throw ConfigError("score model needs at least one atom");
  if (schedule_.levels() < 1) throw ConfigError("score model needs a non-empty schedule");
  if (net_.input_dim() != 3 * n_atoms_ + 1)
    throw ShapeError("network input width " + std::to_string(net_.input_dim()) +
                     " does not match 3*n_atoms+1 = " + std::to_string(3 * n_atoms_ + 1));
  if (net_.output_dim() != 3 * n_atoms_)
    throw ShapeError("network output width " + std::to_string(net_.output_dim()) +
                     " does not match 3*n_atoms = " + std::to_string(3 * n_atoms_));
}

ScoreModel ScoreModel::create(int n_atoms, NoiseSchedule schedule, const std::vector<int>& hidden,
                              std::uint64_t seed, bool center_input) {
  if (n_atoms < 1) throw ConfigError("score model needs at least one atom");
  std::vector<int> layout;
  layout.push_back(3 * n_atoms + 1);
  layout.insert(layout.end(), hidden.begin(), hidden.end());
  layout.push_back(3 * n_atoms);
  return ScoreModel(nn::Mlp::init(layout, nn::Activation::kSilu, seed), n_atoms,
                    std::move(schedule), center_input);
}

void ScoreModel::project(Eigen::MatrixXd& m) const {
  if (!center_input_) return;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>> c(m.col(j).data(),
                                                                            n_atoms_, 3);
    const Eigen::RowVector3d mean = c.colwise().mean();
    c.rowwise() -= mean;
  }
}

Eigen::MatrixXd ScoreModel::features(const Eigen::MatrixXd& coords,
                                     const Eigen::VectorXd& sigmas) const {
  const Eigen::Index dim = 3 * n_atoms_;
  if (coords.rows() != dim)
    throw ShapeError("expected " + std::to_string(n_atoms_) + " atoms, got " +
                     std::to_string(coords.rows() / 3.0));
  if (sigmas.size() != coords.cols()) throw ShapeError("one sigma per sample required");
  Eigen::MatrixXd x(dim + 1, coords.cols());
  x.topRows(dim) = coords;
  Eigen::MatrixXd top = x.topRows(dim);
  project(top);
  x.topRows(dim) = top;
  for (Eigen::Index j = 0; j < sigmas.size(); ++j) {
    if (!(sigmas[j] > 0.0)) throw DomainError("noise level must be positive");
    x(dim, j) = std::log(sigmas[j]);
  }
  return x;
}

Eigen::MatrixXd ScoreModel::finish(const Eigen::MatrixXd& raw, const Eigen::VectorXd& sigmas) const {
  Eigen::MatrixXd out = raw;
  for (Eigen::Index j = 0; j < out.cols(); ++j) out.col(j) /= sigmas[j];
  project(out);
  return out;
}

Eigen::MatrixXd ScoreModel::score_batch(const Eigen::MatrixXd& coords,
                                        const Eigen::VectorXd& sigmas) const {
  return finish(net_.forward(features(coords, sigmas), nullptr), sigmas);
}

Conformation ScoreModel::score(const Conformation& c, double sigma) const {
  if (c.rows() != n_atoms_)
    throw ShapeError("expected " + std::to_string(n_atoms_) + " atoms, got " +
                     std::to_string(c.rows()));
  if (!(sigma > 0.0)) throw DomainError("noise level must be positive");
  const Eigen::MatrixXd s = score_batch(Eigen::MatrixXd(flat(c)), Eigen::VectorXd::Constant(1, sigma));
  return from_flat(s.col(0));
}

// --- checkpoints -----------------------------------------------------------

json checkpoint_to_json(const ScoreModel& model, const json& extra) {
  json layers = json::array();
  const auto& params = model.net().params();
  for (std::size_t k = 0; k < params.size(); ++k) {
    const auto& l = params[k];
    if (!l.weight.allFinite() || !l.bias.allFinite())
      throw PersistenceError("layer " + std::to_string(k) + " has a non-finite parameter");
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(l.weight.size()));
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) w.push_back(l.weight(r, c));
    layers.push_back({{"rows", l.weight.rows()},
                      {"cols", l.weight.cols()},
                      {"weights", w},
                      {"bias", std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size())}});
  }
  json doc;
  doc["format"] = kCheckpointFormat;
  doc["schema_version"] = kCheckpointSchemaVersion;
  doc["score_model"] = {{"n_atoms", model.n_atoms()},
                        {"sigmas", model.schedule().sigmas()},
                        {"center_input", model.center_input()},
                        {"activation", nn::to_string(model.net().activation())}};
  doc["layers"] = std::move(layers);
  doc["train_config"] = extra.contains("train_config") ? extra["train_config"] : json(nullptr);
  doc["final_loss"] = extra.contains("final_loss") ? extra["final_loss"] : json(nullptr);
  return doc;
}

namespace {

const json& field(const json& obj, const char* name, const std::string& where) {
  if (!obj.is_object() || !obj.contains(name))
    throw PersistenceError("checkpoint is missing field '" + where + name + "'");
  return obj.at(name);
}

double finite_number(const json& v, const std::string& what) {
  if (!v.is_number()) throw PersistenceError(what + " is not a finite number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw PersistenceError(what + " is not a finite number");
  return d;
}

}  // namespace

namespace {

ScoreModel parse_checkpoint(const json& doc) {
  if (!doc.is_object() || !doc.contains("format") || doc["format"] != kCheckpointFormat)
    throw PersistenceError("not a checkpoint: bad or missing 'format' header");
  const json& version = field(doc, "schema_version", "");
  if (!version.is_number_integer() || version.get<int>() != kCheckpointSchemaVersion)
    throw PersistenceError("unsupported checkpoint schema_version " + version.dump());

  const json& sm = field(doc, "score_model", "");
  const int n_atoms = field(sm, "n_atoms", "score_model.").get<int>();
  std::vector<double> sigmas;
  for (const auto& s : field(sm, "sigmas", "score_model."))
    sigmas.push_back(finite_number(s, "score_model.sigmas entry"));
  const bool center = field(sm, "center_input", "score_model.").get<bool>();
  const auto act = nn::activation_from_string(field(sm, "activation", "score_model.").get<std::string>());

  nn::ParamSet params;
  const json& layers = field(doc, "layers", "");
  if (!layers.is_array() || layers.empty()) throw PersistenceError("checkpoint has no layers");
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const std::string where = "layers[" + std::to_string(k) + "].";
    const json& l = layers[k];
    const auto rows = field(l, "rows", where).get<Eigen::Index>();
    const auto cols = field(l, "cols", where).get<Eigen::Index>();
    const json& w = field(l, "weights", where);
    const json& b = field(l, "bias", where);
    if (!w.is_array() || static_cast<Eigen::Index>(w.size()) != rows * cols)
      throw PersistenceError("layer " + std::to_string(k) + " weights are truncated");
    if (!b.is_array() || static_cast<Eigen::Index>(b.size()) != rows)
      throw PersistenceError("layer " + std::to_string(k) + " bias is truncated");
    nn::Layer layer{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(rows)};
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c)
        layer.weight(r, c) = finite_number(w[static_cast<std::size_t>(r * cols + c)],
                                           "layer " + std::to_string(k) + " weight");
      layer.bias[r] = finite_number(b[static_cast<std::size_t>(r)], "layer " + std::to_string(k) + " bias");
    }
    params.push_back(std::move(layer));
  }
  try {
    return ScoreModel(nn::Mlp(std::move(params), act), n_atoms, NoiseSchedule(std::move(sigmas)), center);
  } catch (const PersistenceError&) {
    throw;
  } catch (const Error& e) {
    throw PersistenceError(std::string("inconsistent checkpoint: ") + e.what());
  }
}

}  // namespace

ScoreModel checkpoint_from_json(const json& doc) {
  try {
    return parse_checkpoint(doc);
  } catch (const json::exception& e) {
    throw PersistenceError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const ScoreModel& model, const std::filesystem::path& path, const json& extra) {
  io::write_file_atomic(path, checkpoint_to_json(model, extra).dump() + "\n");
}

json load_checkpoint_document(const std::filesystem::path& path) {
  const std::string text = io::read_file(path);
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw PersistenceError("checkpoint '" + path.string() + "' is not valid JSON (truncated?)");
  return doc;
}

ScoreModel load_checkpoint(const std::filesystem::path& path) {
  return checkpoint_from_json(load_checkpoint_document(path));
}

}  // namespace sgmlab
