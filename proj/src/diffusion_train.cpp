#include "sgmlab/diffusion_train.hpp"

#include "sgmlab/errors.hpp"

#include <chrono>
#include <cmath>

namespace sgmlab {

std::string to_string(LossWeighting w) {
  return w == LossWeighting::kSigmaSquared ? "sigma-squared" : "unweighted";
}

LossWeighting loss_weighting_from_string(const std::string& name) {
  if (name == "sigma-squared") return LossWeighting::kSigmaSquared;
  if (name == "unweighted") return LossWeighting::kUnweighted;
  throw ConfigError("unknown loss weighting '" + name + "'");
}

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw ConfigError("lr must be positive");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (steps < 0) throw ConfigError("steps must be non-negative");
  if (!(lambda_ip >= 0.0)) throw ConfigError("lambda must be non-negative");
  if (log_interval < 1) throw ConfigError("log_interval must be at least 1");
}

namespace {
void require_same_shape(const Conformation& a, const Conformation& b, const char* what) {
  if (a.rows() != b.rows()) throw ShapeError(std::string(what) + ": atom counts differ");
}
}  // namespace

Conformation perturb(const Conformation& c0, double sigma, const Conformation& eps) {
  require_same_shape(c0, eps, "perturb");
  return c0 + sigma * eps;
}

Conformation perturb_ip(const Conformation& c0, double sigma, const Conformation& eps,
                        const Conformation& xi, double lambda) {
  require_same_shape(c0, eps, "perturb_ip");
  require_same_shape(c0, xi, "perturb_ip");
  return c0 + sigma * (eps + lambda * xi);
}

LossAndGrad dsm_loss(const ScoreModel& model, const std::vector<DsmSample>& batch, double lambda,
                     LossWeighting weighting) {
  if (batch.empty()) throw ConfigError("empty batch");
  const int n = model.n_atoms();
  const Eigen::Index dim = 3 * n;
  const auto b = static_cast<Eigen::Index>(batch.size());

  Eigen::MatrixXd inputs(dim, b);
  Eigen::MatrixXd targets(dim, b);  // (C_t - C0) / sigma^2
  Eigen::VectorXd sigmas(b);
  Eigen::VectorXd weights(b);
  for (Eigen::Index j = 0; j < b; ++j) {
    const DsmSample& s = batch[static_cast<std::size_t>(j)];
    if (s.c0->rows() != n) throw ShapeError("conformer atom count does not match model");
    const double sigma = model.schedule().sigma(s.level);
    const Conformation ct = perturb(*s.c0, sigma, s.eps);
    const Conformation ct_in = perturb_ip(*s.c0, sigma, s.eps, s.xi, lambda);
    inputs.col(j) = flat(ct_in);
    targets.col(j) = (flat(ct) - flat(*s.c0)) / (sigma * sigma);
    sigmas[j] = sigma;
    weights[j] = weighting == LossWeighting::kSigmaSquared ? sigma * sigma : 1.0;
  }

  nn::ForwardCache cache;
  const Eigen::MatrixXd raw = model.net().forward(model.features(inputs, sigmas), &cache);
  const Eigen::MatrixXd residual = model.finish(raw, sigmas) + targets;

  double total = 0.0;
  Eigen::MatrixXd upstream = residual;
  model.project(upstream);
  for (Eigen::Index j = 0; j < b; ++j) {
    total += weights[j] * residual.col(j).squaredNorm();
    upstream.col(j) *= 2.0 * weights[j] / (sigmas[j] * static_cast<double>(b));
  }
  LossAndGrad out{total / static_cast<double>(b), nn::zeros_like(model.net().params())};
  model.net().backward(cache, upstream, out.grads);
  return out;
}

LossAndGrad dsm_loss(const ScoreModel& model, const Conformation& c0, int level,
                     const Conformation& eps, const Conformation& xi, double lambda,
                     LossWeighting weighting) {
  std::vector<DsmSample> batch{{&c0, level, eps, xi}};
  auto out = dsm_loss(model, batch, lambda, weighting);
  if (!std::isfinite(out.loss)) throw TrainingError(0, "non-finite loss");
  return out;
}

TrainLog train(const std::vector<Conformation>& dataset, ScoreModel& model, const TrainConfig& cfg,
               const std::function<void(const TrainLogRecord&)>& on_log) {
  cfg.validate();
  if (dataset.empty()) throw ConfigError("training dataset is empty");
  for (const auto& c : dataset)
    if (c.rows() != model.n_atoms())
      throw ConfigError("dataset conformer has " + std::to_string(c.rows()) +
                        " atoms, model expects " + std::to_string(model.n_atoms()));

  TrainLog log;
  log.seed = cfg.seed;
  Rng rng(cfg.seed);
  std::uniform_int_distribution<std::size_t> pick(0, dataset.size() - 1);
  std::uniform_int_distribution<int> level(1, model.schedule().levels());
  auto state = nn::AdamState::for_model(model.net());

  const auto start = std::chrono::steady_clock::now();
  double interval_sum = 0.0;
  std::int64_t interval_count = 0;
  std::vector<DsmSample> batch(static_cast<std::size_t>(cfg.batch_size));
  for (std::int64_t step = 1; step <= cfg.steps; ++step) {
    for (auto& s : batch) {
      s.c0 = &dataset[pick(rng)];
      s.level = level(rng);
      s.eps = standard_normal(model.n_atoms(), rng);
      s.xi = standard_normal(model.n_atoms(), rng);
    }
    auto lg = dsm_loss(model, batch, cfg.lambda_ip, cfg.loss_weighting);
    if (!std::isfinite(lg.loss) || lg.loss > 1e6)
      throw TrainingError(step, "loss diverged (" + std::to_string(lg.loss) + ")");
    nn::adam_step(model.net(), lg.grads, state, cfg.lr);

    interval_sum += lg.loss;
    ++interval_count;
    log.final_loss = lg.loss;
    if (step % cfg.log_interval == 0 || step == cfg.steps) {
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      TrainLogRecord rec{step, interval_sum / static_cast<double>(interval_count), secs};
      log.records.push_back(rec);
      if (on_log) on_log(rec);
      interval_sum = 0.0;
      interval_count = 0;
    }
  }
  return log;
}

}  // namespace sgmlab
