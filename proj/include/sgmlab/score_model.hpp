#pragma once

#include "sgmlab/conformation.hpp"
#include "sgmlab/nn/mlp.hpp"
#include "sgmlab/schedule.hpp"
#include "sgmlab/score_function.hpp"

#include "json.hpp"

#include <filesystem>
#include <vector>

namespace sgmlab {

// Noise-conditional score network s(C, sigma) = P(net([C - centroid, log sigma])) / sigma
// where P removes the per-axis mean. Centering and P are both governed by
// center_input; with it off the model is a plain conditional regressor.
class ScoreModel final : public ScoreFunction {
 public:
  ScoreModel(nn::Mlp net, int n_atoms, NoiseSchedule schedule, bool center_input = true);

  // Fresh model with the given hidden widths (zero output layer).
  static ScoreModel create(int n_atoms, NoiseSchedule schedule,
                           const std::vector<int>& hidden = {128, 128, 128},
                           std::uint64_t seed = 0, bool center_input = true);

  int n_atoms() const override { return n_atoms_; }
  bool com_free() const override { return center_input_; }
  Conformation score(const Conformation& c, double sigma) const override;

  // Network input for a batch: one column per sample, coords flattened
  // atom-major, log sigma in the last row.
  Eigen::MatrixXd features(const Eigen::MatrixXd& coords, const Eigen::VectorXd& sigmas) const;
  // Maps raw network outputs to scores, column-wise.
  Eigen::MatrixXd finish(const Eigen::MatrixXd& raw, const Eigen::VectorXd& sigmas) const;
  // Batched score for coordinates laid out as in features().
  Eigen::MatrixXd score_batch(const Eigen::MatrixXd& coords, const Eigen::VectorXd& sigmas) const;

  // Zero-mean projection applied to each column (no-op when centering is off).
  void project(Eigen::MatrixXd& m) const;

  const nn::Mlp& net() const { return net_; }
  nn::Mlp& net() { return net_; }
  const NoiseSchedule& schedule() const { return schedule_; }
  bool center_input() const { return center_input_; }

  bool operator==(const ScoreModel& o) const {
    return n_atoms_ == o.n_atoms_ && center_input_ == o.center_input_ &&
           schedule_ == o.schedule_ && net_ == o.net_;
  }

 private:
  nn::Mlp net_;
  int n_atoms_;
  NoiseSchedule schedule_;
  bool center_input_;
};

// Checkpoint document. `extra` carries the training-config echo and final
// loss; it is stored verbatim and returned by load_checkpoint_document().
inline constexpr const char* kCheckpointFormat = "sgmlab-checkpoint";
inline constexpr int kCheckpointSchemaVersion = 1;

nlohmann::json checkpoint_to_json(const ScoreModel& model, const nlohmann::json& extra = {});
ScoreModel checkpoint_from_json(const nlohmann::json& doc);

void save_checkpoint(const ScoreModel& model, const std::filesystem::path& path,
                     const nlohmann::json& extra = {});
ScoreModel load_checkpoint(const std::filesystem::path& path);
nlohmann::json load_checkpoint_document(const std::filesystem::path& path);

}  // namespace sgmlab
