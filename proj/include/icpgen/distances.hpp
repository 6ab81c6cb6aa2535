#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace icpgen {

enum class MetricKind { squared_euclidean, conditioned_squared_euclidean, softmax_cross_entropy };

// Distance d(target, prediction) used both for correspondence search and as
// the supervised loss. The conditioned kind treats the first z_dim
// coordinates as the conditioning block.
struct MetricSpec {
  MetricKind kind = MetricKind::squared_euclidean;
  std::size_t z_dim = 0;

  static MetricSpec squared_euclidean() { return {}; }
  static MetricSpec conditioned(std::size_t z_dim) {
    return {MetricKind::conditioned_squared_euclidean, z_dim};
  }
  static MetricSpec softmax_cross_entropy() { return {MetricKind::softmax_cross_entropy, 0}; }

  // Throws DimensionError when the spec cannot apply to vectors of `dim`.
  void validate_for(std::size_t dim) const;

  friend bool operator==(const MetricSpec&, const MetricSpec&) = default;
};

// Config tags: "sqeuclidean" | "conditioned" | "softmax_xent".
std::string_view metric_tag(MetricKind kind);
MetricKind metric_kind_from_tag(std::string_view tag);

double squared_euclidean(std::span<const double> a, std::span<const double> b);

// (z1 - z2)^2 + (y1 - y2)^T (y1 - y2) over u = [z1; y1], v = [z2; y2].
double conditioned_distance(std::span<const double> u, std::span<const double> v,
                            std::size_t z_dim);

std::vector<double> softmax(std::span<const double> logits);

// -log softmax(logits)[hot]; `one_hot` must have a single 1 and zeros elsewhere.
double softmax_cross_entropy(std::span<const double> one_hot, std::span<const double> logits);

// Index of the hot component; throws ConfigError when not exactly one-hot.
std::size_t hot_index(std::span<const double> one_hot);

double distance(const MetricSpec& spec, std::span<const double> target,
                std::span<const double> prediction);

// Gradient of distance(spec, target, prediction) with respect to prediction.
std::vector<double> distance_gradient(const MetricSpec& spec, std::span<const double> target,
                                      std::span<const double> prediction);
void distance_gradient_into(const MetricSpec& spec, std::span<const double> target,
                            std::span<const double> prediction, std::span<double> out);

}  // namespace icpgen
