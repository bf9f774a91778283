#include "sgmlab/nn/grad_check.hpp"

#include "sgmlab/errors.hpp"

#include <algorithm>
#include <cmath>

namespace sgmlab::nn {

double grad_check_params(ParamSet& params, const ParamSet& analytic,
                         const std::function<double()>& objective, double step) {
  if (!(step > 0.0) || !std::isfinite(step))
    throw ConfigError("finite-difference step must be positive");
  if (analytic.size() != params.size()) throw ShapeError("analytic gradient layout mismatch");

  std::vector<double> exact;
  exact.reserve(parameter_count(analytic));
  ParamSet a = analytic;
  for_each_parameter(a, [&](double& g) { exact.push_back(g); });

  double worst = 0.0;
  std::size_t idx = 0;
  for_each_parameter(params, [&](double& p) {
    const double saved = p;
    p = saved + step;
    const double plus = objective();
    p = saved - step;
    const double minus = objective();
    p = saved;
    const double numeric = (plus - minus) / (2.0 * step);
    const double an = exact[idx++];
    const double denom = std::max({std::abs(an), std::abs(numeric), 1e-12});
    worst = std::max(worst, std::abs(an - numeric) / denom);
  });
  return worst;
}

double grad_check(const Mlp& model, const Eigen::VectorXd& x, const OutputLoss& loss,
                  double step) {
  if (!(step > 0.0) || !std::isfinite(step))
    throw ConfigError("finite-difference step must be positive");
  const Eigen::VectorXd y = model.forward(x);
  const auto grads = model.backward(x, loss.gradient(y));
  Mlp probe = model;
  return grad_check_params(
      probe.params(), grads.params, [&] { return loss.value(probe.forward(x)); }, step);
}

}  // namespace sgmlab::nn
