#pragma once

#include "sgmlab/nn/mlp.hpp"

#include <functional>

namespace sgmlab::nn {

// Scalar loss on the network output together with its gradient.
struct OutputLoss {
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
};

// Max over parameters of |analytic - numeric| / max(|analytic|, |numeric|, 1e-12)
// where numeric is the central difference with the given step.
double grad_check(const Mlp& model, const Eigen::VectorXd& x, const OutputLoss& loss,
                  double step = 1e-5);

// Same measure for an arbitrary parameterised objective: `objective`
// evaluates at the current parameters of `params`, `analytic` is its
// gradient there.
double grad_check_params(ParamSet& params, const ParamSet& analytic,
                         const std::function<double()>& objective, double step = 1e-5);

}  // namespace sgmlab::nn
