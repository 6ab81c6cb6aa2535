#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "icpgen/matrix.hpp"

namespace icpgen::nn {

inline constexpr double kSeluScale = 1.0507009873554805;
inline constexpr double kSeluAlpha = 1.6732632423543772;

inline constexpr const char* kHiddenActivation = "bipolar-selu";
inline constexpr const char* kOutputActivation = "linear";

double selu(double x);
double selu_derivative(double x);

// Even-indexed units use selu(x), odd-indexed units use -selu(-x).
std::vector<double> bipolar_selu(std::span<const double> x);
double bipolar_selu_unit(double x, std::size_t unit);
double bipolar_selu_unit_derivative(double x, std::size_t unit);

struct DenseLayer {
  Matrix weights;               // in_dim x out_dim
  std::vector<double> biases;   // out_dim
  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

// Fully connected network: bipolar SELU on every hidden layer, linear output.
class DenseNetwork {
 public:
  DenseNetwork() = default;
  // All parameters zero. Throws ConfigError on fewer than two dims or a zero dim.
  explicit DenseNetwork(std::vector<std::size_t> layer_dims);

  const std::vector<std::size_t>& layer_dims() const { return dims_; }
  std::size_t input_dim() const { return dims_.front(); }
  std::size_t output_dim() const { return dims_.back(); }
  std::size_t layer_count() const { return layers_.size(); }
  std::size_t parameter_count() const;

  DenseLayer& layer(std::size_t i) { return layers_.at(i); }
  const DenseLayer& layer(std::size_t i) const { return layers_.at(i); }

  friend bool operator==(const DenseNetwork&, const DenseNetwork&) = default;

 private:
  std::vector<std::size_t> dims_;
  std::vector<DenseLayer> layers_;
};

// layer_inputs[l] is the batch entering layer l (layer_inputs[0] is the
// network input); pre_activations[l] is that layer's affine output.
struct ActivationCache {
  std::vector<Matrix> layer_inputs;
  std::vector<Matrix> pre_activations;
};

struct ForwardResult {
  Matrix output;
  ActivationCache cache;
};

ForwardResult forward(const DenseNetwork& net, const Matrix& inputs);

// Forward pass without keeping the cache.
Matrix predict(const DenseNetwork& net, const Matrix& inputs);

struct GradientSet {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;

  static GradientSet zeros_like(const DenseNetwork& net);
  bool congruent_with(const DenseNetwork& net) const;
};

// Gradients of the batch-mean loss. output_gradient holds dL/dy_hat per
// example; the per-example gradients are summed and divided by batch size.
GradientSet backward(const DenseNetwork& net, const ActivationCache& cache,
                     const Matrix& output_gradient);

std::vector<double> clip_output_gradient(std::span<const double> g, double bound = 0.1);
void clip_output_gradient_in_place(Matrix& g, double bound = 0.1);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

// Moments are flattened in layer order: weights row-major, then biases.
struct AdamState {
  AdamConfig config;
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::uint64_t step_count = 0;

  static AdamState for_network(const DenseNetwork& net, AdamConfig config = {});

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

void adam_step(AdamState& state, DenseNetwork& net, const GradientSet& grads);

// Weights ~ Normal(0, 1 / fan_in), biases zero, deterministic in seed.
DenseNetwork init_network(std::vector<std::size_t> layer_dims, std::uint64_t seed);

}  // namespace icpgen::nn
