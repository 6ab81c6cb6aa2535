#pragma once

// Data-parallel inner loops shared by the network and the matcher.
//
// Every OpenMP kernel parallelizes over output rows (or output weight rows)
// only, and each output element is accumulated by exactly one thread in a
// fixed order. Results therefore do not depend on the thread count.
//
// The kernels::serial namespace holds plain loop reference versions with a
// different accumulation order; they exist for tests and benchmarks.

#include <cstddef>
#include <limits>
#include <span>

#include "icpgen/matrix.hpp"

namespace icpgen::kernels {

// Minimum multiply-add count before a kernel forks threads.
inline constexpr std::size_t kParallelWorkThreshold = 1u << 15;

// out = a * w + bias, bias broadcast over rows.
void affine(const Matrix& a, const Matrix& w, std::span<const double> bias, Matrix& out);

// out = delta * w^T
void multiply_transposed(const Matrix& delta, const Matrix& w, Matrix& out);

// out = a^T * delta
void transposed_multiply(const Matrix& a, const Matrix& delta, Matrix& out);

// out(i, j) = sum_k (t(i, k) - p(j, k))^2
void pairwise_sqeuclidean(const Matrix& t, const Matrix& p, Matrix& out);

// out(i, j) = dist(t.row(i), p.row(j)) for an arbitrary distance callable.
template <class Dist>
void pairwise_apply(const Matrix& t, const Matrix& p, Matrix& out, Dist&& dist) {
  const auto n = static_cast<std::ptrdiff_t>(t.rows());
  const std::size_t work = t.rows() * p.rows() * (t.cols() + 1);
#pragma omp parallel for schedule(static) if (work > kParallelWorkThreshold)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto ti = t.row(static_cast<std::size_t>(i));
    for (std::size_t j = 0; j < p.rows(); ++j) {
      out(static_cast<std::size_t>(i), j) = dist(ti, p.row(j));
    }
  }
}

struct Nearest {
  std::size_t index = std::numeric_limits<std::size_t>::max();
  double distance = std::numeric_limits<double>::infinity();
};

// argmin over candidate rows j with alive[j] != 0 of dist(query, row j).
// Ties resolve to the lowest index. Threads scan contiguous chunks and the
// chunk winners are merged in index order.
template <class Dist>
Nearest nearest_alive(std::span<const double> query, const Matrix& candidates,
                      std::span<const char> alive, Dist&& dist) {
  Nearest best;
  const auto n = static_cast<std::ptrdiff_t>(candidates.rows());
  const std::size_t work = candidates.rows() * (candidates.cols() + 1);
#pragma omp parallel if (work > kParallelWorkThreshold)
  {
    Nearest local;
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t j = 0; j < n; ++j) {
      const auto ju = static_cast<std::size_t>(j);
      if (!alive[ju]) continue;
      const double d = dist(query, candidates.row(ju));
      if (d < local.distance || (d == local.distance && ju < local.index)) {
        local = {ju, d};
      }
    }
#pragma omp critical(icpgen_nearest_merge)
    {
      if (local.distance < best.distance ||
          (local.distance == best.distance && local.index < best.index)) {
        best = local;
      }
    }
  }
  return best;
}

// Applies ICPGEN_THREADS (if set and positive) as the OpenMP thread cap.
void apply_thread_limit_from_env();

// Threads a parallel region would currently use; 1 without OpenMP.
int max_threads();

namespace serial {

void affine(const Matrix& a, const Matrix& w, std::span<const double> bias, Matrix& out);
void multiply_transposed(const Matrix& delta, const Matrix& w, Matrix& out);
void transposed_multiply(const Matrix& a, const Matrix& delta, Matrix& out);
void pairwise_sqeuclidean(const Matrix& t, const Matrix& p, Matrix& out);

}  // namespace serial

}  // namespace icpgen::kernels
