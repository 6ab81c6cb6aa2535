#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "icpgen/distances.hpp"
#include "icpgen/matrix.hpp"
#include "icpgen/random.hpp"

namespace icpgen {

// Bijection between targets and predictions: permutation[i] = j matches
// target i to prediction j.
struct Assignment {
  std::vector<std::size_t> permutation;
  std::vector<double> per_pair_distance;
  double total_cost = 0.0;

  std::size_t size() const { return permutation.size(); }
  // Every prediction index appears exactly once.
  bool is_bijection() const;

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

// Entry (i, j) = d(target_i, prediction_j).
using CostMatrix = Matrix;

// Largest batch for which greedy and alternating matching materialize the
// full cost matrix; above it distances are computed per query.
inline constexpr std::size_t kMaterializeLimit = 20000;

struct MatchOptions {
  std::size_t materialize_limit = kMaterializeLimit;
};

CostMatrix pairwise_costs(const SampleBatch& targets, const SampleBatch& predictions,
                          const MetricSpec& metric);

// Visits targets in a random order; each takes the nearest prediction not
// yet consumed. Ties go to the lowest prediction index.
Assignment greedy_match(const SampleBatch& targets, const SampleBatch& predictions,
                        const MetricSpec& metric, Rng& rng, MatchOptions options = {});

// Each step flips a coin: with probability target_side_probability a random
// remaining target takes its nearest remaining prediction, otherwise a
// random remaining prediction takes its nearest remaining target.
Assignment alternating_match(const SampleBatch& targets, const SampleBatch& predictions,
                             const MetricSpec& metric, Rng& rng, MatchOptions options = {},
                             double target_side_probability = 0.5);

// Minimum-cost perfect matching (shortest augmenting paths with potentials),
// O(N^3). Rows are targets, columns predictions.
Assignment hungarian(const CostMatrix& costs);

struct EmdEstimate {
  double value = 0.0;
  std::string metric;      // tag of the distance the value is expressed in
  bool exact = true;       // false for the greedy upper bound
  std::size_t sample_count = 0;
};

// Optimal assignment cost divided by the sample count.
EmdEstimate empirical_emd(const SampleBatch& sample_p, const SampleBatch& sample_q,
                          const MetricSpec& metric);

// Greedy matching cost divided by the sample count; an upper bound on
// empirical_emd usable beyond exact-assignment sizes.
EmdEstimate greedy_emd_upper_bound(const SampleBatch& sample_p, const SampleBatch& sample_q,
                                   const MetricSpec& metric, Rng& rng);

}  // namespace icpgen
