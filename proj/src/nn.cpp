#include "icpgen/nn.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "icpgen/errors.hpp"
#include "icpgen/kernels.hpp"

namespace icpgen::nn {

double selu(double x) {
  return x > 0.0 ? kSeluScale * x : kSeluScale * kSeluAlpha * std::expm1(x);
}

double selu_derivative(double x) {
  return x > 0.0 ? kSeluScale : kSeluScale * kSeluAlpha * std::exp(x);
}

double bipolar_selu_unit(double x, std::size_t unit) {
  return unit % 2 == 0 ? selu(x) : -selu(-x);
}

double bipolar_selu_unit_derivative(double x, std::size_t unit) {
  return unit % 2 == 0 ? selu_derivative(x) : selu_derivative(-x);
}

std::vector<double> bipolar_selu(std::span<const double> x) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = bipolar_selu_unit(x[i], i);
  return out;
}

DenseNetwork::DenseNetwork(std::vector<std::size_t> layer_dims) : dims_(std::move(layer_dims)) {
  if (dims_.size() < 2) throw ConfigError("DenseNetwork: need at least input and output dims");
  if (std::find(dims_.begin(), dims_.end(), std::size_t{0}) != dims_.end()) {
    throw ConfigError("DenseNetwork: layer dims must be positive");
  }
  layers_.reserve(dims_.size() - 1);
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    layers_.push_back({Matrix(dims_[l], dims_[l + 1]), std::vector<double>(dims_[l + 1], 0.0)});
  }
}

std::size_t DenseNetwork::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers_) n += layer.weights.size() + layer.biases.size();
  return n;
}

namespace {

void activate_hidden(const Matrix& pre, Matrix& out) {
  out = Matrix(pre.rows(), pre.cols());
  for (std::size_t r = 0; r < pre.rows(); ++r) {
    for (std::size_t c = 0; c < pre.cols(); ++c) out(r, c) = bipolar_selu_unit(pre(r, c), c);
  }
}

}  // namespace

ForwardResult forward(const DenseNetwork& net, const Matrix& inputs) {
  if (inputs.cols() != net.input_dim()) {
    throw DimensionError("forward: input width " + std::to_string(inputs.cols()) +
                         " does not match network input dim " +
                         std::to_string(net.input_dim()));
  }
  ForwardResult result;
  auto& cache = result.cache;
  cache.layer_inputs.reserve(net.layer_count());
  cache.pre_activations.reserve(net.layer_count());
  cache.layer_inputs.push_back(inputs);
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const auto& layer = net.layer(l);
    Matrix pre(inputs.rows(), layer.weights.cols());
    kernels::affine(cache.layer_inputs.back(), layer.weights, layer.biases, pre);
    cache.pre_activations.push_back(std::move(pre));
    if (l + 1 < net.layer_count()) {
      Matrix act;
      activate_hidden(cache.pre_activations.back(), act);
      cache.layer_inputs.push_back(std::move(act));
    }
  }
  result.output = cache.pre_activations.back();
  return result;
}

Matrix predict(const DenseNetwork& net, const Matrix& inputs) {
  if (inputs.cols() != net.input_dim()) {
    throw DimensionError("predict: input width does not match network input dim");
  }
  Matrix current = inputs;
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const auto& layer = net.layer(l);
    Matrix pre(current.rows(), layer.weights.cols());
    kernels::affine(current, layer.weights, layer.biases, pre);
    if (l + 1 < net.layer_count()) {
      activate_hidden(pre, current);
    } else {
      current = std::move(pre);
    }
  }
  return current;
}

GradientSet GradientSet::zeros_like(const DenseNetwork& net) {
  GradientSet g;
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const auto& layer = net.layer(l);
    g.weights.emplace_back(layer.weights.rows(), layer.weights.cols());
    g.biases.emplace_back(layer.biases.size(), 0.0);
  }
  return g;
}

bool GradientSet::congruent_with(const DenseNetwork& net) const {
  if (weights.size() != net.layer_count() || biases.size() != net.layer_count()) return false;
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const auto& layer = net.layer(l);
    if (weights[l].rows() != layer.weights.rows() || weights[l].cols() != layer.weights.cols() ||
        biases[l].size() != layer.biases.size()) {
      return false;
    }
  }
  return true;
}

GradientSet backward(const DenseNetwork& net, const ActivationCache& cache,
                     const Matrix& output_gradient) {
  if (cache.pre_activations.size() != net.layer_count() ||
      cache.layer_inputs.size() != net.layer_count()) {
    throw DimensionError("backward: cache does not belong to this network");
  }
  const Matrix& out = cache.pre_activations.back();
  if (output_gradient.rows() != out.rows() || output_gradient.cols() != out.cols()) {
    throw DimensionError("backward: output gradient shape differs from forward output");
  }
  GradientSet grads = GradientSet::zeros_like(net);
  const std::size_t batch = output_gradient.rows();
  if (batch == 0) return grads;

  Matrix delta = output_gradient;
  const double inv_batch = 1.0 / static_cast<double>(batch);
  for (double& v : delta.storage()) v *= inv_batch;

  for (std::size_t l = net.layer_count(); l-- > 0;) {
    kernels::transposed_multiply(cache.layer_inputs[l], delta, grads.weights[l]);
    auto& gb = grads.biases[l];
    for (std::size_t r = 0; r < delta.rows(); ++r) {
      for (std::size_t c = 0; c < delta.cols(); ++c) gb[c] += delta(r, c);
    }
    if (l == 0) break;
    Matrix upstream(delta.rows(), net.layer(l).weights.rows());
    kernels::multiply_transposed(delta, net.layer(l).weights, upstream);
    const Matrix& pre = cache.pre_activations[l - 1];
    for (std::size_t r = 0; r < upstream.rows(); ++r) {
      for (std::size_t c = 0; c < upstream.cols(); ++c) {
        upstream(r, c) *= bipolar_selu_unit_derivative(pre(r, c), c);
      }
    }
    delta = std::move(upstream);
  }
  return grads;
}

std::vector<double> clip_output_gradient(std::span<const double> g, double bound) {
  std::vector<double> out(g.begin(), g.end());
  for (double& v : out) v = std::clamp(v, -bound, bound);
  return out;
}

void clip_output_gradient_in_place(Matrix& g, double bound) {
  for (double& v : g.storage()) v = std::clamp(v, -bound, bound);
}

AdamState AdamState::for_network(const DenseNetwork& net, AdamConfig config) {
  AdamState s;
  s.config = config;
  s.first_moment.assign(net.parameter_count(), 0.0);
  s.second_moment.assign(net.parameter_count(), 0.0);
  return s;
}

void adam_step(AdamState& state, DenseNetwork& net, const GradientSet& grads) {
  if (!grads.congruent_with(net) || state.first_moment.size() != net.parameter_count() ||
      state.second_moment.size() != net.parameter_count()) {
    throw DimensionError("adam_step: gradients or optimizer state do not match network");
  }
  const auto& cfg = state.config;
  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  const double correction1 = 1.0 - std::pow(cfg.beta1, t);
  const double correction2 = 1.0 - std::pow(cfg.beta2, t);

  std::size_t k = 0;
  auto update = [&](double& param, double g) {
    double& m = state.first_moment[k];
    double& v = state.second_moment[k];
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
    const double m_hat = m / correction1;
    const double v_hat = v / correction2;
    param -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    ++k;
  };
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    auto& layer = net.layer(l);
    auto& w = layer.weights.storage();
    const auto& gw = grads.weights[l].storage();
    for (std::size_t i = 0; i < w.size(); ++i) update(w[i], gw[i]);
    for (std::size_t i = 0; i < layer.biases.size(); ++i) update(layer.biases[i], grads.biases[l][i]);
  }
}

DenseNetwork init_network(std::vector<std::size_t> layer_dims, std::uint64_t seed) {
  DenseNetwork net(std::move(layer_dims));
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    auto& w = net.layer(l).weights;
    std::normal_distribution<double> normal(0.0, std::sqrt(1.0 / static_cast<double>(w.rows())));
    for (double& v : w.storage()) v = normal(rng);
  }
  return net;
}

}  // namespace icpgen::nn
