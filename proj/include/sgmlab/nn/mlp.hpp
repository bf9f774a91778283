#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace sgmlab::nn {

enum class Activation { kSilu, kTanh, kIdentity };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

// One affine map y = W x + b. W is (out x in).
struct Layer {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;

  bool operator==(const Layer&) const = default;
};

// Gradients and optimizer moments share the parameter layout.
using ParamSet = std::vector<Layer>;

ParamSet zeros_like(const ParamSet& p);
std::size_t parameter_count(const ParamSet& p);
bool all_finite(const ParamSet& p);
// Visits every scalar parameter in a fixed order: layer, weight (column
// major), then bias.
template <typename F>
void for_each_parameter(ParamSet& p, F&& f) {
  for (std::size_t k = 0; k < p.size(); ++k) {
    for (Eigen::Index i = 0; i < p[k].weight.size(); ++i) f(p[k].weight.data()[i]);
    for (Eigen::Index i = 0; i < p[k].bias.size(); ++i) f(p[k].bias.data()[i]);
  }
}

// Intermediate values of a batched forward pass, kept for backward.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> inputs;  // input to each layer (in x batch)
  std::vector<Eigen::MatrixXd> preact;  // pre-activation of each hidden layer
};

// Dense multilayer perceptron. The activation applies to every hidden layer;
// the output layer is affine.
class Mlp {
 public:
  Mlp() = default;
  Mlp(ParamSet layers, Activation act);

  // Weights ~ N(0, 1/fan_in), biases zero, output layer all zero.
  static Mlp init(const std::vector<int>& layout, Activation act, std::uint64_t seed);

  int input_dim() const;
  int output_dim() const;
  Activation activation() const { return act_; }
  const ParamSet& params() const { return layers_; }
  ParamSet& params() { return layers_; }

  Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
  // Columns are samples.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, ForwardCache* cache) const;

  struct Gradients {
    ParamSet params;
    Eigen::VectorXd input;
  };
  // Reverse-mode gradients of <upstream, forward(x)> w.r.t. parameters and x.
  Gradients backward(const Eigen::VectorXd& x, const Eigen::VectorXd& upstream) const;
  // Batched variant; parameter gradients are summed over columns. Returns
  // the input gradient matrix when input_grad is non-null.
  void backward(const ForwardCache& cache, const Eigen::MatrixXd& upstream, ParamSet& grads,
                Eigen::MatrixXd* input_grad = nullptr) const;

  bool operator==(const Mlp&) const = default;

 private:
  void validate() const;

  ParamSet layers_;
  Activation act_ = Activation::kSilu;
};

}  // namespace sgmlab::nn
