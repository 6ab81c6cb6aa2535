#include "icpgen/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <numeric>
#include <optional>

#include "icpgen/errors.hpp"
#include "icpgen/kernels.hpp"

namespace icpgen {

namespace {

void require_matchable(const SampleBatch& targets, const SampleBatch& predictions,
                       const MetricSpec& metric, const char* what) {
  if (targets.rows() != predictions.rows()) {
    throw DimensionError(std::string(what) + ": target and prediction counts differ");
  }
  if (targets.cols() != predictions.cols()) {
    throw DimensionError(std::string(what) + ": target and prediction dimensions differ");
  }
  if (targets.empty()) throw DimensionError(std::string(what) + ": empty sample sets");
  metric.validate_for(targets.cols());
}

// d(target_i, prediction_j) either looked up in a materialized matrix or
// computed on demand.
class CostSource {
 public:
  CostSource(const SampleBatch& targets, const SampleBatch& predictions, const MetricSpec& metric,
             const MatchOptions& options)
      : targets_(targets), predictions_(predictions), metric_(metric) {
    if (targets.rows() <= options.materialize_limit) {
      costs_ = pairwise_costs(targets, predictions, metric);
    }
  }

  double operator()(std::size_t i, std::size_t j) const {
    if (costs_) return (*costs_)(i, j);
    return distance(metric_, targets_.row(i), predictions_.row(j));
  }

  kernels::Nearest nearest_prediction(std::size_t target, std::span<const char> alive) const {
    if (costs_) {
      kernels::Nearest best;
      const auto row = costs_->row(target);
      for (std::size_t j = 0; j < row.size(); ++j) {
        if (alive[j] && row[j] < best.distance) best = {j, row[j]};
      }
      return best;
    }
    return kernels::nearest_alive(
        targets_.row(target), predictions_, alive,
        [this](std::span<const double> t, std::span<const double> p) {
          return distance(metric_, t, p);
        });
  }

  kernels::Nearest nearest_target(std::size_t prediction, std::span<const char> alive) const {
    if (costs_) {
      kernels::Nearest best;
      for (std::size_t i = 0; i < costs_->rows(); ++i) {
        const double d = (*costs_)(i, prediction);
        if (alive[i] && d < best.distance) best = {i, d};
      }
      return best;
    }
    return kernels::nearest_alive(
        predictions_.row(prediction), targets_, alive,
        [this](std::span<const double> p, std::span<const double> t) {
          return distance(metric_, t, p);
        });
  }

 private:
  const SampleBatch& targets_;
  const SampleBatch& predictions_;
  MetricSpec metric_;
  std::optional<CostMatrix> costs_;
};

// Indices still unmatched, with O(1) uniform pick and removal.
class Pool {
 public:
  explicit Pool(std::size_t n) : items_(n), position_(n), alive_(n, 1) {
    std::iota(items_.begin(), items_.end(), std::size_t{0});
    std::iota(position_.begin(), position_.end(), std::size_t{0});
  }

  std::size_t pick(Rng& rng) const { return items_[uniform_index(rng, items_.size())]; }

  void remove(std::size_t value) {
    const std::size_t pos = position_[value];
    const std::size_t last = items_.back();
    items_[pos] = last;
    position_[last] = pos;
    items_.pop_back();
    alive_[value] = 0;
  }

  std::span<const char> alive() const { return alive_; }

 private:
  std::vector<std::size_t> items_;
  std::vector<std::size_t> position_;
  std::vector<char> alive_;
};

kernels::Nearest checked(kernels::Nearest best) {
  if (best.index == std::numeric_limits<std::size_t>::max()) {
    throw std::runtime_error("matching: no finite distance to any remaining candidate");
  }
  return best;
}

void finalize(Assignment& a) {
  a.total_cost = 0.0;
  for (double d : a.per_pair_distance) a.total_cost += d;
}

}  // namespace

bool Assignment::is_bijection() const {
  if (per_pair_distance.size() != permutation.size()) return false;
  std::vector<char> seen(permutation.size(), 0);
  for (std::size_t j : permutation) {
    if (j >= permutation.size() || seen[j]) return false;
    seen[j] = 1;
  }
  return true;
}

CostMatrix pairwise_costs(const SampleBatch& targets, const SampleBatch& predictions,
                          const MetricSpec& metric) {
  if (targets.rows() != predictions.rows()) {
    throw DimensionError("pairwise_costs: target and prediction counts differ");
  }
  if (targets.cols() != predictions.cols()) {
    throw DimensionError("pairwise_costs: target and prediction dimensions differ");
  }
  metric.validate_for(targets.cols());
  CostMatrix out(targets.rows(), predictions.rows());
  switch (metric.kind) {
    // The conditioned distance sums the z and y blocks, which is the squared
    // distance over the concatenation.
    case MetricKind::squared_euclidean:
    case MetricKind::conditioned_squared_euclidean:
      kernels::pairwise_sqeuclidean(targets, predictions, out);
      break;
    case MetricKind::softmax_cross_entropy:
      kernels::pairwise_apply(targets, predictions, out,
                              [](std::span<const double> t, std::span<const double> p) {
                                return softmax_cross_entropy(t, p);
                              });
      break;
  }
  return out;
}

Assignment greedy_match(const SampleBatch& targets, const SampleBatch& predictions,
                        const MetricSpec& metric, Rng& rng, MatchOptions options) {
  require_matchable(targets, predictions, metric, "greedy_match");
  const std::size_t n = targets.rows();
  const CostSource costs(targets, predictions, metric, options);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  Assignment result;
  result.permutation.assign(n, 0);
  result.per_pair_distance.assign(n, 0.0);
  std::vector<char> alive(n, 1);
  for (std::size_t i : order) {
    const auto best = checked(costs.nearest_prediction(i, alive));
    alive[best.index] = 0;
    result.permutation[i] = best.index;
    result.per_pair_distance[i] = best.distance;
  }
  finalize(result);
  return result;
}

Assignment alternating_match(const SampleBatch& targets, const SampleBatch& predictions,
                             const MetricSpec& metric, Rng& rng, MatchOptions options,
                             double target_side_probability) {
  require_matchable(targets, predictions, metric, "alternating_match");
  const std::size_t n = targets.rows();
  const CostSource costs(targets, predictions, metric, options);

  Assignment result;
  result.permutation.assign(n, 0);
  result.per_pair_distance.assign(n, 0.0);
  Pool remaining_targets(n);
  Pool remaining_predictions(n);
  std::bernoulli_distribution coin(target_side_probability);
  for (std::size_t step = 0; step < n; ++step) {
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    if (coin(rng)) {
      i = remaining_targets.pick(rng);
      const auto best = checked(costs.nearest_prediction(i, remaining_predictions.alive()));
      j = best.index;
      d = best.distance;
    } else {
      j = remaining_predictions.pick(rng);
      const auto best = checked(costs.nearest_target(j, remaining_targets.alive()));
      i = best.index;
      d = best.distance;
    }
    remaining_targets.remove(i);
    remaining_predictions.remove(j);
    result.permutation[i] = j;
    result.per_pair_distance[i] = d;
  }
  finalize(result);
  return result;
}

Assignment hungarian(const CostMatrix& costs) {
  const std::size_t n = costs.rows();
  if (costs.cols() != n) throw DimensionError("hungarian: cost matrix is not square");
  for (double c : costs.storage()) {
    if (!std::isfinite(c)) throw DimensionError("hungarian: cost matrix has non-finite entries");
  }
  Assignment result;
  if (n == 0) return result;

  // 1-based arrays; column 0 is the virtual start of each augmenting path.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> row_potential(n + 1, 0.0);
  std::vector<double> col_potential(n + 1, 0.0);
  std::vector<std::size_t> row_of_col(n + 1, 0);
  std::vector<std::size_t> way(n + 1, 0);
  std::vector<double> min_slack(n + 1);
  std::vector<char> used(n + 1);

  for (std::size_t row = 1; row <= n; ++row) {
    row_of_col[0] = row;
    std::size_t col0 = 0;
    std::fill(min_slack.begin(), min_slack.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[col0] = 1;
      const std::size_t r0 = row_of_col[col0];
      double delta = inf;
      std::size_t col1 = 0;
      for (std::size_t col = 1; col <= n; ++col) {
        if (used[col]) continue;
        const double slack = costs(r0 - 1, col - 1) - row_potential[r0] - col_potential[col];
        if (slack < min_slack[col]) {
          min_slack[col] = slack;
          way[col] = col0;
        }
        if (min_slack[col] < delta) {
          delta = min_slack[col];
          col1 = col;
        }
      }
      for (std::size_t col = 0; col <= n; ++col) {
        if (used[col]) {
          row_potential[row_of_col[col]] += delta;
          col_potential[col] -= delta;
        } else {
          min_slack[col] -= delta;
        }
      }
      col0 = col1;
    } while (row_of_col[col0] != 0);
    do {
      const std::size_t col1 = way[col0];
      row_of_col[col0] = row_of_col[col1];
      col0 = col1;
    } while (col0 != 0);
  }

  result.permutation.assign(n, 0);
  result.per_pair_distance.assign(n, 0.0);
  for (std::size_t col = 1; col <= n; ++col) {
    const std::size_t row = row_of_col[col] - 1;
    result.permutation[row] = col - 1;
    result.per_pair_distance[row] = costs(row, col - 1);
  }
  finalize(result);
  return result;
}

EmdEstimate empirical_emd(const SampleBatch& sample_p, const SampleBatch& sample_q,
                          const MetricSpec& metric) {
  require_matchable(sample_p, sample_q, metric, "empirical_emd");
  const auto assignment = hungarian(pairwise_costs(sample_p, sample_q, metric));
  return {assignment.total_cost / static_cast<double>(sample_p.rows()),
          std::string(metric_tag(metric.kind)), true, sample_p.rows()};
}

EmdEstimate greedy_emd_upper_bound(const SampleBatch& sample_p, const SampleBatch& sample_q,
                                   const MetricSpec& metric, Rng& rng) {
  const auto assignment = greedy_match(sample_p, sample_q, metric, rng);
  return {assignment.total_cost / static_cast<double>(sample_p.rows()),
          std::string(metric_tag(metric.kind)), false, sample_p.rows()};
}

}  // namespace icpgen
