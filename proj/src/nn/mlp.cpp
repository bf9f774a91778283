#include "sgmlab/nn/mlp.hpp"

#include "sgmlab/errors.hpp"

#include <cmath>
#include <random>

namespace sgmlab::nn {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::kSilu: return "silu";
    case Activation::kTanh: return "tanh";
    case Activation::kIdentity: return "identity";
  }
  return "unknown";
}

Activation activation_from_string(const std::string& name) {
  if (name == "silu") return Activation::kSilu;
  if (name == "tanh") return Activation::kTanh;
  if (name == "identity") return Activation::kIdentity;
  throw ConfigError("unknown activation '" + name + "'");
}

ParamSet zeros_like(const ParamSet& p) {
  ParamSet z;
  z.reserve(p.size());
  for (const auto& l : p)
    z.push_back({Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()),
                 Eigen::VectorXd::Zero(l.bias.size())});
  return z;
}

std::size_t parameter_count(const ParamSet& p) {
  std::size_t n = 0;
  for (const auto& l : p) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

bool all_finite(const ParamSet& p) {
  for (const auto& l : p)
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  return true;
}

namespace {

void activate(Activation act, const Eigen::MatrixXd& z, Eigen::MatrixXd& out) {
  switch (act) {
    case Activation::kSilu:
      out = z.array() / (1.0 + (-z.array()).exp());
      break;
    case Activation::kTanh:
      out = z.array().tanh();
      break;
    case Activation::kIdentity:
      out = z;
      break;
  }
}

// d act / dz evaluated at z, multiplied into g.
void activation_backward(Activation act, const Eigen::MatrixXd& z, Eigen::MatrixXd& g) {
  switch (act) {
    case Activation::kSilu: {
      const Eigen::ArrayXXd s = 1.0 / (1.0 + (-z.array()).exp());
      g.array() *= s * (1.0 + z.array() * (1.0 - s));
      break;
    }
    case Activation::kTanh:
      g.array() *= 1.0 - z.array().tanh().square();
      break;
    case Activation::kIdentity:
      break;
  }
}

}  // namespace

Mlp::Mlp(ParamSet layers, Activation act) : layers_(std::move(layers)), act_(act) { validate(); }

void Mlp::validate() const {
  if (layers_.empty()) throw ConfigError("mlp has no layers");
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const auto& l = layers_[k];
    if (l.weight.rows() == 0 || l.weight.cols() == 0)
      throw ConfigError("layer " + std::to_string(k) + " has an empty weight matrix");
    if (l.bias.size() != l.weight.rows())
      throw ShapeError("layer " + std::to_string(k) + " bias length does not match rows");
    if (k > 0 && l.weight.cols() != layers_[k - 1].weight.rows())
      throw ShapeError("layer " + std::to_string(k) + " input width does not chain");
  }
}

Mlp Mlp::init(const std::vector<int>& layout, Activation act, std::uint64_t seed) {
  if (layout.size() < 2) throw ConfigError("layout needs at least an input and an output width");
  for (int w : layout)
    if (w <= 0) throw ConfigError("layout widths must be positive");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  ParamSet layers;
  for (std::size_t k = 0; k + 1 < layout.size(); ++k) {
    const int fan_in = layout[k];
    const int fan_out = layout[k + 1];
    Layer l{Eigen::MatrixXd::Zero(fan_out, fan_in), Eigen::VectorXd::Zero(fan_out)};
    if (k + 2 < layout.size()) {
      const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
      for (Eigen::Index i = 0; i < l.weight.size(); ++i) l.weight.data()[i] = scale * normal(rng);
    }
    layers.push_back(std::move(l));
  }
  return Mlp(std::move(layers), act);
}

int Mlp::input_dim() const { return static_cast<int>(layers_.front().weight.cols()); }
int Mlp::output_dim() const { return static_cast<int>(layers_.back().weight.rows()); }

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x) const {
  return forward(Eigen::MatrixXd(x), nullptr).col(0);
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x, ForwardCache* cache) const {
  if (x.rows() != input_dim())
    throw ShapeError("mlp input has " + std::to_string(x.rows()) + " rows, expected " +
                     std::to_string(input_dim()));
  if (cache) {
    cache->inputs.assign(layers_.size(), {});
    cache->preact.assign(layers_.size() - 1, {});
  }
  Eigen::MatrixXd h = x;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const auto& l = layers_[k];
    Eigen::MatrixXd z = l.weight * h;
    z.colwise() += l.bias;
    if (cache) cache->inputs[k] = std::move(h);
    if (k + 1 == layers_.size()) return z;
    activate(act_, z, h);
    if (cache) cache->preact[k] = std::move(z);
  }
  return h;  // unreachable
}

void Mlp::backward(const ForwardCache& cache, const Eigen::MatrixXd& upstream, ParamSet& grads,
                   Eigen::MatrixXd* input_grad) const {
  if (cache.inputs.size() != layers_.size())
    throw ShapeError("forward cache does not belong to this network");
  if (upstream.rows() != output_dim() || upstream.cols() != cache.inputs.front().cols())
    throw ShapeError("upstream gradient shape does not match the forward pass");
  if (grads.size() != layers_.size()) grads = zeros_like(layers_);

  Eigen::MatrixXd g = upstream;
  for (std::size_t k = layers_.size(); k-- > 0;) {
    grads[k].weight.noalias() += g * cache.inputs[k].transpose();
    grads[k].bias += g.rowwise().sum();
    if (k == 0 && input_grad == nullptr) break;
    Eigen::MatrixXd prev = layers_[k].weight.transpose() * g;
    if (k > 0) activation_backward(act_, cache.preact[k - 1], prev);
    g = std::move(prev);
  }
  if (input_grad) *input_grad = std::move(g);
}

Mlp::Gradients Mlp::backward(const Eigen::VectorXd& x, const Eigen::VectorXd& upstream) const {
  ForwardCache cache;
  forward(Eigen::MatrixXd(x), &cache);
  Gradients out{zeros_like(layers_), {}};
  Eigen::MatrixXd gx;
  backward(cache, Eigen::MatrixXd(upstream), out.params, &gx);
  out.input = gx.col(0);
  return out;
}

}  // namespace sgmlab::nn
