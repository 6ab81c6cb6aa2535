#include "icpgen/distances.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "icpgen/errors.hpp"

namespace icpgen {

namespace {

void require_same_size(std::span<const double> a, std::span<const double> b, const char* what) {
  if (a.size() != b.size()) {
    throw DimensionError(std::string(what) + ": dimensions " + std::to_string(a.size()) +
                         " and " + std::to_string(b.size()) + " differ");
  }
}

// -log softmax(v)[c], evaluated as (max - v[c]) + log1p(sum of the other
// shifted exponentials) so a dominant hot logit keeps full precision.
double negative_log_softmax(std::span<const double> v, std::size_t c) {
  const auto top_it = std::max_element(v.begin(), v.end());
  const auto top_index = static_cast<std::size_t>(top_it - v.begin());
  double rest = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i != top_index) rest += std::exp(v[i] - *top_it);
  }
  return (*top_it - v[c]) + std::log1p(rest);
}

}  // namespace

void MetricSpec::validate_for(std::size_t dim) const {
  if (kind == MetricKind::conditioned_squared_euclidean && (z_dim == 0 || z_dim >= dim)) {
    throw DimensionError("conditioned metric: z_dim " + std::to_string(z_dim) +
                         " must be in [1, " + std::to_string(dim) + ")");
  }
}

std::string_view metric_tag(MetricKind kind) {
  switch (kind) {
    case MetricKind::squared_euclidean: return "sqeuclidean";
    case MetricKind::conditioned_squared_euclidean: return "conditioned";
    case MetricKind::softmax_cross_entropy: return "softmax_xent";
  }
  return "sqeuclidean";
}

MetricKind metric_kind_from_tag(std::string_view tag) {
  if (tag == "sqeuclidean") return MetricKind::squared_euclidean;
  if (tag == "conditioned") return MetricKind::conditioned_squared_euclidean;
  if (tag == "softmax_xent") return MetricKind::softmax_cross_entropy;
  throw ConfigError("unknown metric tag '" + std::string(tag) + "'");
}

double squared_euclidean(std::span<const double> a, std::span<const double> b) {
  require_same_size(a, b, "squared_euclidean");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

double conditioned_distance(std::span<const double> u, std::span<const double> v,
                            std::size_t z_dim) {
  require_same_size(u, v, "conditioned_distance");
  if (z_dim > u.size()) throw DimensionError("conditioned_distance: z_dim exceeds dimension");
  // z block then y block in one running sum, so the value is bit-identical
  // to squared_euclidean over the concatenation.
  return squared_euclidean(u, v);
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  if (logits.empty()) return out;
  const double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - top);
    sum += out[i];
  }
  for (double& p : out) p /= sum;
  return out;
}

std::size_t hot_index(std::span<const double> one_hot) {
  std::size_t hot = one_hot.size();
  for (std::size_t i = 0; i < one_hot.size(); ++i) {
    if (one_hot[i] == 1.0) {
      if (hot != one_hot.size()) throw ConfigError("one-hot vector has more than one hot entry");
      hot = i;
    } else if (one_hot[i] != 0.0) {
      throw ConfigError("one-hot vector has an entry other than 0 or 1");
    }
  }
  if (hot == one_hot.size()) throw ConfigError("one-hot vector has no hot entry");
  return hot;
}

double softmax_cross_entropy(std::span<const double> one_hot, std::span<const double> logits) {
  require_same_size(one_hot, logits, "softmax_cross_entropy");
  const std::size_t c = hot_index(one_hot);
  return negative_log_softmax(logits, c);
}

double distance(const MetricSpec& spec, std::span<const double> target,
                std::span<const double> prediction) {
  switch (spec.kind) {
    case MetricKind::squared_euclidean: return squared_euclidean(target, prediction);
    case MetricKind::conditioned_squared_euclidean:
      return conditioned_distance(target, prediction, spec.z_dim);
    case MetricKind::softmax_cross_entropy: return softmax_cross_entropy(target, prediction);
  }
  return 0.0;
}

void distance_gradient_into(const MetricSpec& spec, std::span<const double> target,
                            std::span<const double> prediction, std::span<double> out) {
  require_same_size(target, prediction, "distance_gradient");
  if (out.size() != prediction.size()) throw DimensionError("distance_gradient: output size");
  switch (spec.kind) {
    case MetricKind::squared_euclidean:
    case MetricKind::conditioned_squared_euclidean:
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = 2.0 * (prediction[i] - target[i]);
      return;
    case MetricKind::softmax_cross_entropy: {
      const std::size_t c = hot_index(target);
      const auto p = softmax(prediction);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = p[i];
      out[c] -= 1.0;
      return;
    }
  }
}

std::vector<double> distance_gradient(const MetricSpec& spec, std::span<const double> target,
                                      std::span<const double> prediction) {
  std::vector<double> out(prediction.size());
  distance_gradient_into(spec, target, prediction, out);
  return out;
}

}  // namespace icpgen
