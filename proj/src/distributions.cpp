#include "icpgen/distributions.hpp"

#include <cmath>
#include <numeric>

namespace icpgen {

void OriginSpec::validate() const {
  if (dim == 0 || dim % 2 != 0) {
    throw ConfigError("origin dim must be a positive even integer, got " + std::to_string(dim));
  }
  if (!(bernoulli_p >= 0.0 && bernoulli_p <= 1.0)) {
    throw ConfigError("origin bernoulli_p must lie in [0, 1]");
  }
  if (!(uniform_low < uniform_high)) throw ConfigError("origin uniform_low must be < uniform_high");
}

SampleBatch sample_origin(const OriginSpec& spec, std::size_t count, Rng& rng) {
  spec.validate();
  const std::size_t half = spec.dim / 2;
  std::bernoulli_distribution coin(spec.bernoulli_p);
  std::uniform_real_distribution<double> uniform(spec.uniform_low, spec.uniform_high);
  SampleBatch out(count, spec.dim);
  for (std::size_t r = 0; r < count; ++r) {
    for (std::size_t c = 0; c < half; ++c) out(r, c) = coin(rng) ? 1.0 : 0.0;
    for (std::size_t c = half; c < spec.dim; ++c) out(r, c) = uniform(rng);
  }
  return out;
}

SampleBatch sample_gmm3(std::size_t count, Rng& rng, const Gmm3Params& params) {
  std::normal_distribution<double> normal(0.0, 1.0);
  SampleBatch out(count, 2);
  for (std::size_t r = 0; r < count; ++r) {
    const std::size_t k = uniform_index(rng, 3);
    out(r, 0) = params.means[k][0] + params.sigmas[k] * normal(rng);
    out(r, 1) = params.means[k][1] + params.sigmas[k] * normal(rng);
  }
  return out;
}

SampleBatch sample_noisy_sinusoid(std::size_t count, Rng& rng, const SinusoidParams& params) {
  if (!(params.x_low < params.x_high)) throw ConfigError("sinusoid: x_low must be < x_high");
  std::uniform_real_distribution<double> uniform(params.x_low, params.x_high);
  std::normal_distribution<double> normal(0.0, 1.0);
  SampleBatch out(count, 2);
  for (std::size_t r = 0; r < count; ++r) {
    const double x = uniform(rng);
    out(r, 0) = x;
    out(r, 1) = std::sin(x) + params.noise_sigma * normal(rng);
  }
  return out;
}

std::array<double, 2> swiss_roll_point(double t, const SwissRollParams& params) {
  return {t * std::cos(t) / params.scale, t * std::sin(t) / params.scale};
}

SampleBatch sample_swiss_roll(std::size_t count, Rng& rng, const SwissRollParams& params) {
  std::uniform_real_distribution<double> uniform(params.t_min, params.t_max);
  std::normal_distribution<double> normal(0.0, 1.0);
  SampleBatch out(count, 2);
  for (std::size_t r = 0; r < count; ++r) {
    const auto p = swiss_roll_point(uniform(rng), params);
    out(r, 0) = p[0] + params.noise_sigma * normal(rng);
    out(r, 1) = p[1] + params.noise_sigma * normal(rng);
  }
  return out;
}

void validate_probabilities(std::span<const double> probabilities) {
  if (probabilities.empty()) throw ConfigError("multinoulli: empty probability vector");
  double sum = 0.0;
  for (double p : probabilities) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw ConfigError("multinoulli: probabilities must be finite and nonnegative");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("multinoulli: probabilities must sum to 1");
}

SampleBatch sample_multinoulli(std::span<const double> probabilities, std::size_t count, Rng& rng) {
  validate_probabilities(probabilities);
  const std::size_t k = probabilities.size();
  std::vector<double> cumulative(k);
  std::partial_sum(probabilities.begin(), probabilities.end(), cumulative.begin());
  std::size_t last_positive = 0;
  for (std::size_t c = 0; c < k; ++c) {
    if (probabilities[c] > 0.0) last_positive = c;
  }
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  SampleBatch out(count, k);
  for (std::size_t r = 0; r < count; ++r) {
    const double u = uniform(rng);
    std::size_t c = 0;
    while (c < k && !(u < cumulative[c])) ++c;
    out(r, c < k ? c : last_positive) = 1.0;
  }
  return out;
}

std::string target_kind_tag(TargetKind kind) {
  switch (kind) {
    case TargetKind::gmm3: return "gmm3";
    case TargetKind::noisy_sinusoid: return "noisy_sinusoid";
    case TargetKind::swiss_roll: return "swiss_roll";
    case TargetKind::multinoulli: return "multinoulli";
    case TargetKind::mnist: return "mnist";
  }
  return "gmm3";
}

TargetKind target_kind_from_tag(const std::string& tag) {
  for (auto kind : {TargetKind::gmm3, TargetKind::noisy_sinusoid, TargetKind::swiss_roll,
                    TargetKind::multinoulli, TargetKind::mnist}) {
    if (target_kind_tag(kind) == tag) return kind;
  }
  throw ConfigError("unknown target kind '" + tag + "'");
}

std::string TargetSpec::tag() const { return target_kind_tag(kind); }

TargetSampler::TargetSampler(TargetSpec spec) : spec_(std::move(spec)) {
  if (spec_.kind == TargetKind::multinoulli) validate_probabilities(spec_.probabilities);
  if (spec_.kind == TargetKind::mnist) {
    const auto data = load_mnist(spec_.images_path, spec_.labels_path);
    rows_ = std::make_shared<const Matrix>(
        mnist_conditioned_rows(data, spec_.normalize_label, spec_.mnist_limit));
  }
}

TargetSampler::TargetSampler(TargetSpec spec, std::shared_ptr<const Matrix> rows)
    : spec_(std::move(spec)), rows_(std::move(rows)) {
  if (!rows_ || rows_->empty()) throw ConfigError("target dataset is empty");
}

std::size_t TargetSampler::dim() const {
  if (rows_) return rows_->cols();
  if (spec_.kind == TargetKind::multinoulli) return spec_.probabilities.size();
  return 2;
}

SampleBatch TargetSampler::sample(std::size_t count, Rng& rng) const {
  if (rows_) {
    SampleBatch out(count, rows_->cols());
    for (std::size_t r = 0; r < count; ++r) {
      const auto src = rows_->row(uniform_index(rng, rows_->rows()));
      std::copy(src.begin(), src.end(), out.row(r).begin());
    }
    return out;
  }
  switch (spec_.kind) {
    case TargetKind::gmm3: return sample_gmm3(count, rng, spec_.gmm3);
    case TargetKind::noisy_sinusoid: return sample_noisy_sinusoid(count, rng, spec_.sinusoid);
    case TargetKind::swiss_roll: return sample_swiss_roll(count, rng, spec_.swiss_roll);
    case TargetKind::multinoulli: return sample_multinoulli(spec_.probabilities, count, rng);
    case TargetKind::mnist: break;
  }
  throw ConfigError("target sampler has no dataset loaded");
}

}  // namespace icpgen
