#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "icpgen/distances.hpp"
#include "icpgen/distributions.hpp"
#include "icpgen/matching.hpp"
#include "icpgen/nn.hpp"
#include "icpgen/random.hpp"

namespace icpgen {

enum class MatchingVariant { greedy, alternating };

struct TrainConfig {
  MatchingVariant matching = MatchingVariant::greedy;
  // Conditioned training feeds the first z_dim target coordinates to the
  // network alongside the noise.
  bool conditioned = false;
  std::size_t z_dim = 0;

  std::size_t matching_batch = 500;
  std::size_t supervised_minibatch = 100;
  std::size_t supervised_passes_per_epoch = 1;
  std::size_t epochs = 50;

  MetricSpec metric;
  OriginSpec origin;
  TargetSpec target;
  std::vector<std::size_t> hidden_layers{50, 50, 50};
  double clip_bound = 0.1;
  nn::AdamConfig adam;
  std::uint64_t seed = 1;

  // Per-epoch evaluation; 0 disables. EMD is exact (Hungarian).
  std::size_t emd_sample_size = 0;
  std::size_t pmf_sample_size = 1000;

  void validate() const;
  std::vector<std::size_t> layer_dims(std::size_t target_dim) const;
};

// Supervised set produced by one matching: row k of inputs must be mapped
// onto row k of targets.
struct OrderedPairs {
  Matrix inputs;
  Matrix targets;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double matched_cost_sum = 0.0;
  double matched_cost_mean = 0.0;
  std::optional<double> emd;
  std::optional<double> pmf_error;
  double seconds = 0.0;
};

struct MetricsHistory {
  std::vector<EpochRecord> records;
};

struct TrainState {
  nn::DenseNetwork net;
  nn::AdamState adam;
  std::size_t epoch = 0;
};

// Intermediate values of one epoch, exposed for inspection and tests.
struct EpochArtifacts {
  SampleBatch origin_batch;
  SampleBatch target_batch;
  Matrix predictions;  // matching view: conditioned rows carry the input z
  Assignment assignment;
  OrderedPairs pairs;
};

// Fresh network (seeded from config.seed) and optimizer state.
TrainState init_train_state(const TrainConfig& config, const TargetSampler& target);

// Network inputs for an origin batch: x, or [z; x] with z from `targets`.
Matrix network_inputs(const TrainConfig& config, const SampleBatch& origin,
                      const SampleBatch& targets);

// Predictions as seen by the matcher. Conditioned rows replace the predicted
// z block with the z that was fed in.
Matrix matching_view(const TrainConfig& config, const Matrix& outputs, const Matrix& inputs);

// Input x_j with target y_i for each matched pair; conditioned inputs become
// [z_i; x_j] so the input always carries the target's z.
OrderedPairs assemble_pairs(const TrainConfig& config, const SampleBatch& origin,
                            const SampleBatch& targets, const Assignment& assignment);

// One pass of minibatch Adam over the pairs: clipped distance gradient at the
// output, backpropagated, one optimizer step per minibatch.
void supervised_pass(TrainState& state, const TrainConfig& config, const OrderedPairs& pairs,
                     Rng& rng);

// Sum of d(target_k, f(input_k)) over the pair set.
double pair_loss(const nn::DenseNetwork& net, const MetricSpec& metric, const OrderedPairs& pairs);

EpochRecord train_epoch(TrainState& state, const TrainConfig& config, const TargetSampler& target,
                        Rng& rng, EpochArtifacts* artifacts = nullptr);

using EpochObserver = std::function<void(const TrainState&, const EpochRecord&)>;

struct TrainResult {
  TrainState state;
  MetricsHistory history;
};

TrainResult train(const TrainConfig& config, const TargetSampler& target,
                  const EpochObserver& observer = {});

// Continues from an existing state up to config.epochs total epochs.
TrainResult train_from(TrainState state, const TrainConfig& config, const TargetSampler& target,
                       const EpochObserver& observer = {});

// Maps fresh origin noise. Conditioned networks require `conditioning`
// (count x z_dim); unconditioned networks reject it.
Matrix generate(const nn::DenseNetwork& net, const TrainConfig& config, std::size_t count,
                Rng& rng, const Matrix* conditioning = nullptr);

std::vector<std::size_t> argmax_labels(const Matrix& outputs);

// Mean over categories of |empirical frequency - probability|.
double pmf_error(std::span<const std::size_t> labels, std::span<const double> probabilities);

// Mean pmf_error of sample_size draws from the true distribution itself,
// averaged over `repetitions` Monte-Carlo runs.
double pmf_reference_error(std::span<const double> probabilities, std::size_t sample_size,
                           std::size_t repetitions, Rng& rng);

// Exact EMD between `sample_size` generated rows and as many fresh target
// rows. Conditioned generation draws its z from an independent target batch.
EmdEstimate evaluate_emd(const nn::DenseNetwork& net, const TrainConfig& config,
                         const TargetSampler& target, std::size_t sample_size, Rng& rng);

}  // namespace icpgen
