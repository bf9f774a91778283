#pragma once

#include "sgmlab/nn/mlp.hpp"

#include <cstdint>

namespace sgmlab::nn {

struct AdamState {
  ParamSet m;
  ParamSet v;
  std::int64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState for_model(const Mlp& model);
};

// One bias-corrected Adam update. Throws TrainingError (carrying the step
// index the update would have had) when any gradient is non-finite; the
// model and state are left untouched in that case.
void adam_step(Mlp& model, const ParamSet& grads, AdamState& state, double lr);

}  // namespace sgmlab::nn
