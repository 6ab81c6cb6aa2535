#include "icpgen/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "icpgen/errors.hpp"

namespace icpgen {

namespace {

constexpr std::uint64_t kInitStream = 0x1a17;
constexpr std::uint64_t kEvalStream = 0xe7a1;

}  // namespace

void TrainConfig::validate() const {
  origin.validate();
  if (matching_batch == 0) throw ConfigError("matching_batch must be positive");
  if (supervised_minibatch == 0) throw ConfigError("supervised_minibatch must be positive");
  if (supervised_minibatch > matching_batch) {
    throw ConfigError("supervised_minibatch must not exceed matching_batch");
  }
  if (supervised_passes_per_epoch == 0) {
    throw ConfigError("supervised_passes_per_epoch must be positive");
  }
  if (!(clip_bound > 0.0)) throw ConfigError("clip_bound must be positive");
  if (!(adam.learning_rate > 0.0)) throw ConfigError("adam learning_rate must be positive");
  if (!(adam.beta1 > 0.0 && adam.beta1 < 1.0) || !(adam.beta2 > 0.0 && adam.beta2 < 1.0)) {
    throw ConfigError("adam betas must lie in (0, 1)");
  }
  if (!(adam.epsilon > 0.0)) throw ConfigError("adam epsilon must be positive");
  for (std::size_t h : hidden_layers) {
    if (h == 0) throw ConfigError("hidden layer widths must be positive");
  }
  const bool categorical = target.kind == TargetKind::multinoulli;
  if (metric.kind == MetricKind::softmax_cross_entropy && !categorical) {
    throw ConfigError("metric softmax_xent requires a multinoulli target");
  }
  if (conditioned) {
    if (categorical) throw ConfigError("conditioned training of a categorical target is not supported");
    if (z_dim == 0) throw ConfigError("conditioned training needs z_dim >= 1");
    if (metric.kind == MetricKind::conditioned_squared_euclidean && metric.z_dim != z_dim) {
      throw ConfigError("conditioned metric z_dim must equal the training z_dim");
    }
  } else if (metric.kind == MetricKind::conditioned_squared_euclidean) {
    throw ConfigError("metric 'conditioned' requires conditioned training");
  }
}

std::vector<std::size_t> TrainConfig::layer_dims(std::size_t target_dim) const {
  if (conditioned && z_dim >= target_dim) {
    throw ConfigError("z_dim must be smaller than the target dimension");
  }
  std::vector<std::size_t> dims;
  dims.push_back(origin.dim + (conditioned ? z_dim : 0));
  dims.insert(dims.end(), hidden_layers.begin(), hidden_layers.end());
  dims.push_back(target_dim);
  return dims;
}

TrainState init_train_state(const TrainConfig& config, const TargetSampler& target) {
  config.validate();
  auto init_rng = derived_rng(config.seed, kInitStream);
  TrainState state;
  state.net = nn::init_network(config.layer_dims(target.dim()), init_rng());
  state.adam = nn::AdamState::for_network(state.net, config.adam);
  return state;
}

Matrix network_inputs(const TrainConfig& config, const SampleBatch& origin,
                      const SampleBatch& targets) {
  if (!config.conditioned) return origin;
  if (targets.rows() != origin.rows()) {
    throw DimensionError("network_inputs: origin and target batch sizes differ");
  }
  return hconcat(column_block(targets, 0, config.z_dim), origin);
}

Matrix matching_view(const TrainConfig& config, const Matrix& outputs, const Matrix& inputs) {
  if (!config.conditioned) return outputs;
  Matrix view = outputs;
  for (std::size_t r = 0; r < view.rows(); ++r) {
    for (std::size_t c = 0; c < config.z_dim; ++c) view(r, c) = inputs(r, c);
  }
  return view;
}

OrderedPairs assemble_pairs(const TrainConfig& config, const SampleBatch& origin,
                            const SampleBatch& targets, const Assignment& assignment) {
  if (assignment.size() != targets.rows() || origin.rows() != targets.rows()) {
    throw DimensionError("assemble_pairs: assignment size does not match batches");
  }
  OrderedPairs pairs;
  pairs.inputs = gather_rows(origin, assignment.permutation);
  if (config.conditioned) {
    pairs.inputs = hconcat(column_block(targets, 0, config.z_dim), pairs.inputs);
  }
  pairs.targets = targets;
  return pairs;
}

void supervised_pass(TrainState& state, const TrainConfig& config, const OrderedPairs& pairs,
                     Rng& rng) {
  const std::size_t n = pairs.inputs.rows();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  const std::size_t mb = config.supervised_minibatch;
  for (std::size_t start = 0; start < n; start += mb) {
    const std::size_t len = std::min(mb, n - start);
    const std::span<const std::size_t> idx(order.data() + start, len);
    const Matrix inputs = gather_rows(pairs.inputs, idx);
    const Matrix targets = gather_rows(pairs.targets, idx);
    auto fwd = nn::forward(state.net, inputs);
    Matrix grad(len, fwd.output.cols());
    for (std::size_t r = 0; r < len; ++r) {
      distance_gradient_into(config.metric, targets.row(r), fwd.output.row(r), grad.row(r));
    }
    nn::clip_output_gradient_in_place(grad, config.clip_bound);
    const auto grads = nn::backward(state.net, fwd.cache, grad);
    nn::adam_step(state.adam, state.net, grads);
  }
}

double pair_loss(const nn::DenseNetwork& net, const MetricSpec& metric, const OrderedPairs& pairs) {
  const Matrix out = nn::predict(net, pairs.inputs);
  double sum = 0.0;
  for (std::size_t r = 0; r < out.rows(); ++r) sum += distance(metric, pairs.targets.row(r), out.row(r));
  return sum;
}

EpochRecord train_epoch(TrainState& state, const TrainConfig& config, const TargetSampler& target,
                        Rng& rng, EpochArtifacts* artifacts) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = config.matching_batch;
  const auto expected = config.layer_dims(target.dim());
  if (state.net.layer_dims().front() != expected.front() ||
      state.net.layer_dims().back() != expected.back()) {
    throw DimensionError("train_epoch: network dims do not match the configuration");
  }

  SampleBatch origin = sample_origin(config.origin, n, rng);
  SampleBatch targets = target.sample(n, rng);
  if (targets.empty()) throw ConfigError("train_epoch: target source produced no samples");

  const Matrix inputs = network_inputs(config, origin, targets);
  Matrix predictions = matching_view(config, nn::predict(state.net, inputs), inputs);

  Assignment assignment = config.matching == MatchingVariant::greedy
                              ? greedy_match(targets, predictions, config.metric, rng)
                              : alternating_match(targets, predictions, config.metric, rng);
  OrderedPairs pairs = assemble_pairs(config, origin, targets, assignment);

  EpochRecord record;
  record.epoch = state.epoch + 1;
  record.matched_cost_sum = assignment.total_cost;
  record.matched_cost_mean = assignment.total_cost / static_cast<double>(n);

  for (std::size_t pass = 0; pass < config.supervised_passes_per_epoch; ++pass) {
    supervised_pass(state, config, pairs, rng);
  }
  state.epoch += 1;

  if (config.emd_sample_size > 0 || target.categorical()) {
    auto eval_rng = derived_rng(config.seed, kEvalStream, state.epoch);
    if (config.emd_sample_size > 0) {
      record.emd = evaluate_emd(state.net, config, target, config.emd_sample_size, eval_rng).value;
    }
    if (target.categorical() && config.pmf_sample_size > 0) {
      const auto labels = argmax_labels(generate(state.net, config, config.pmf_sample_size, eval_rng));
      record.pmf_error = pmf_error(labels, config.target.probabilities);
    }
  }
  record.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (artifacts) {
    artifacts->origin_batch = std::move(origin);
    artifacts->target_batch = std::move(targets);
    artifacts->predictions = std::move(predictions);
    artifacts->assignment = std::move(assignment);
    artifacts->pairs = std::move(pairs);
  }
  return record;
}

TrainResult train_from(TrainState state, const TrainConfig& config, const TargetSampler& target,
                       const EpochObserver& observer) {
  config.validate();
  // The training stream is keyed by the epoch it resumes at, so a resumed
  // run does not replay the random draws of epochs already done.
  Rng rng = state.epoch == 0 ? Rng(config.seed) : derived_rng(config.seed, 0, state.epoch);
  TrainResult result{std::move(state), {}};
  while (result.state.epoch < config.epochs) {
    auto record = train_epoch(result.state, config, target, rng);
    if (observer) observer(result.state, record);
    result.history.records.push_back(record);
  }
  return result;
}

TrainResult train(const TrainConfig& config, const TargetSampler& target,
                  const EpochObserver& observer) {
  return train_from(init_train_state(config, target), config, target, observer);
}

Matrix generate(const nn::DenseNetwork& net, const TrainConfig& config, std::size_t count,
                Rng& rng, const Matrix* conditioning) {
  if (config.conditioned && !conditioning) {
    throw ConfigError("generate: conditioned network needs conditioning values");
  }
  if (!config.conditioned && conditioning) {
    throw ConfigError("generate: unconditioned network does not accept conditioning values");
  }
  if (count == 0) return Matrix(0, net.output_dim());
  SampleBatch noise = sample_origin(config.origin, count, rng);
  if (!config.conditioned) return nn::predict(net, noise);
  if (conditioning->rows() != count || conditioning->cols() != config.z_dim) {
    throw DimensionError("generate: conditioning must be count x z_dim");
  }
  return nn::predict(net, hconcat(*conditioning, noise));
}

std::vector<std::size_t> argmax_labels(const Matrix& outputs) {
  std::vector<std::size_t> labels(outputs.rows());
  for (std::size_t r = 0; r < outputs.rows(); ++r) {
    const auto row = outputs.row(r);
    labels[r] = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return labels;
}

double pmf_error(std::span<const std::size_t> labels, std::span<const double> probabilities) {
  if (probabilities.empty()) return 0.0;
  std::vector<double> counts(probabilities.size(), 0.0);
  for (std::size_t label : labels) {
    if (label >= counts.size()) throw DimensionError("pmf_error: label out of range");
    counts[label] += 1.0;
  }
  const double total = labels.empty() ? 1.0 : static_cast<double>(labels.size());
  double err = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) err += std::abs(counts[k] / total - probabilities[k]);
  return err / static_cast<double>(counts.size());
}

double pmf_reference_error(std::span<const double> probabilities, std::size_t sample_size,
                           std::size_t repetitions, Rng& rng) {
  validate_probabilities(probabilities);
  if (repetitions == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t rep = 0; rep < repetitions; ++rep) {
    const auto draws = sample_multinoulli(probabilities, sample_size, rng);
    sum += pmf_error(argmax_labels(draws), probabilities);
  }
  return sum / static_cast<double>(repetitions);
}

EmdEstimate evaluate_emd(const nn::DenseNetwork& net, const TrainConfig& config,
                         const TargetSampler& target, std::size_t sample_size, Rng& rng) {
  const SampleBatch fresh = target.sample(sample_size, rng);
  Matrix generated;
  if (config.conditioned) {
    const Matrix z = column_block(target.sample(sample_size, rng), 0, config.z_dim);
    generated = generate(net, config, sample_size, rng, &z);
  } else {
    generated = generate(net, config, sample_size, rng);
  }
  return empirical_emd(fresh, generated, config.metric);
}

}  // namespace icpgen
