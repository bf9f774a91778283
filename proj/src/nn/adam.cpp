#include "sgmlab/nn/adam.hpp"

#include "sgmlab/errors.hpp"

#include <cmath>

namespace sgmlab::nn {

AdamState AdamState::for_model(const Mlp& model) {
  AdamState s;
  s.m = zeros_like(model.params());
  s.v = zeros_like(model.params());
  return s;
}

void adam_step(Mlp& model, const ParamSet& grads, AdamState& state, double lr) {
  ParamSet& params = model.params();
  if (grads.size() != params.size()) throw ShapeError("gradient layer count does not match model");
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (grads[k].weight.rows() != params[k].weight.rows() ||
        grads[k].weight.cols() != params[k].weight.cols() ||
        grads[k].bias.size() != params[k].bias.size())
      throw ShapeError("gradient of layer " + std::to_string(k) + " is misshapen");
  }
  if (!all_finite(grads)) throw TrainingError(state.step + 1, "non-finite gradient");
  if (state.m.size() != params.size()) {
    state.m = zeros_like(params);
    state.v = zeros_like(params);
  }

  state.step += 1;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  const double b1 = state.beta1;
  const double b2 = state.beta2;
  const double eps = state.eps;

  auto update = [&](auto& p, const auto& g, auto& m, auto& v) {
    m.array() = b1 * m.array() + (1.0 - b1) * g.array();
    v.array() = b2 * v.array() + (1.0 - b2) * g.array().square();
    p.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  };
  for (std::size_t k = 0; k < params.size(); ++k) {
    update(params[k].weight, grads[k].weight, state.m[k].weight, state.v[k].weight);
    update(params[k].bias, grads[k].bias, state.m[k].bias, state.v[k].bias);
  }
}

}  // namespace sgmlab::nn
