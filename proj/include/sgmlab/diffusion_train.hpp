#pragma once

#include "sgmlab/conformation.hpp"
#include "sgmlab/nn/adam.hpp"
#include "sgmlab/score_model.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace sgmlab {

enum class LossWeighting { kSigmaSquared, kUnweighted };

std::string to_string(LossWeighting w);
LossWeighting loss_weighting_from_string(const std::string& name);

struct TrainConfig {
  double lr = 1e-3;
  int batch_size = 64;
  std::int64_t steps = 20000;
  double lambda_ip = 0.0;
  std::uint64_t seed = 0;
  LossWeighting loss_weighting = LossWeighting::kSigmaSquared;
  std::int64_t log_interval = 100;

  void validate() const;
};

struct TrainLogRecord {
  std::int64_t step;
  double loss;  // mean batch loss over the interval ending at `step`
  double seconds;
};

struct TrainLog {
  std::vector<TrainLogRecord> records;
  double final_loss = 0.0;
  std::uint64_t seed = 0;
};

// C0 + sigma * eps.
Conformation perturb(const Conformation& c0, double sigma, const Conformation& eps);

// C0 + sigma * (eps + lambda * xi): the input-perturbed sample.
Conformation perturb_ip(const Conformation& c0, double sigma, const Conformation& eps,
                        const Conformation& xi, double lambda);

// One draw of the training distribution.
struct DsmSample {
  const Conformation* c0;
  int level;  // 1-based
  Conformation eps;
  Conformation xi;
};

struct LossAndGrad {
  double loss;
  nn::ParamSet grads;
};

// Mean over `batch` of the denoising loss
//   w_t * || s(C0 + sigma_t (eps + lambda xi), sigma_t) + (C_t - C0) / sigma_t^2 ||^2
// with C_t = C0 + sigma_t eps, w_t = sigma_t^2 or 1. The target is always
// built from the unperturbed C_t.
LossAndGrad dsm_loss(const ScoreModel& model, const std::vector<DsmSample>& batch, double lambda,
                     LossWeighting weighting);

// Single-sample form.
LossAndGrad dsm_loss(const ScoreModel& model, const Conformation& c0, int level,
                     const Conformation& eps, const Conformation& xi, double lambda,
                     LossWeighting weighting);

// Runs cfg.steps Adam iterations on the pooled conformers of `dataset`.
// Each iteration draws, per batch entry and in this order: conformer index,
// level, eps, xi. xi is drawn even when lambda is zero so runs that differ
// only in lambda see the same samples.
TrainLog train(const std::vector<Conformation>& dataset, ScoreModel& model, const TrainConfig& cfg,
               const std::function<void(const TrainLogRecord&)>& on_log = {});

}  // namespace sgmlab
