// OpenMP kernels against their serial references, plus the matchers.
// Set ICPGEN_THREADS or OMP_NUM_THREADS to vary the thread count.

#include <benchmark/benchmark.h>

#include <random>

#include "icpgen/kernels.hpp"
#include "icpgen/matching.hpp"

using namespace icpgen;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix m(rows, cols);
  for (double& v : m.storage()) v = u(rng);
  return m;
}

// Batch rows x 300 -> 300, the width of the MNIST hidden layers.
void BM_affine(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random_matrix(n, 300, 1), w = random_matrix(300, 300, 2);
  const std::vector<double> bias(300, 0.1);
  Matrix out(n, 300);
  for (auto _ : state) {
    kernels::affine(a, w, bias, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * 300 * 300));
}

void BM_affine_serial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random_matrix(n, 300, 1), w = random_matrix(300, 300, 2);
  const std::vector<double> bias(300, 0.1);
  Matrix out;
  for (auto _ : state) {
    kernels::serial::affine(a, w, bias, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * 300 * 300));
}

void BM_transposed_multiply(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random_matrix(n, 300, 3), d = random_matrix(n, 300, 4);
  Matrix out(300, 300);
  for (auto _ : state) {
    kernels::transposed_multiply(a, d, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_transposed_multiply_serial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random_matrix(n, 300, 3), d = random_matrix(n, 300, 4);
  Matrix out;
  for (auto _ : state) {
    kernels::serial::transposed_multiply(a, d, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_pairwise(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto dim = static_cast<std::size_t>(state.range(1));
  const Matrix t = random_matrix(n, dim, 5), p = random_matrix(n, dim, 6);
  Matrix out(n, n);
  for (auto _ : state) {
    kernels::pairwise_sqeuclidean(t, p, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_pairwise_serial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto dim = static_cast<std::size_t>(state.range(1));
  const Matrix t = random_matrix(n, dim, 5), p = random_matrix(n, dim, 6);
  Matrix out;
  for (auto _ : state) {
    kernels::serial::pairwise_sqeuclidean(t, p, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_greedy_match(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix t = random_matrix(n, 2, 7), p = random_matrix(n, 2, 8);
  Rng rng(9);
  for (auto _ : state) {
    benchmark::DoNotOptimize(greedy_match(t, p, MetricSpec::squared_euclidean(), rng).total_cost);
  }
}

void BM_hungarian(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix t = random_matrix(n, 2, 10), p = random_matrix(n, 2, 11);
  const auto costs = pairwise_costs(t, p, MetricSpec::squared_euclidean());
  for (auto _ : state) benchmark::DoNotOptimize(hungarian(costs).total_cost);
}

}  // namespace

BENCHMARK(BM_affine)->Arg(100)->Arg(2000);
BENCHMARK(BM_affine_serial)->Arg(100)->Arg(2000);
BENCHMARK(BM_transposed_multiply)->Arg(100)->Arg(2000);
BENCHMARK(BM_transposed_multiply_serial)->Arg(100)->Arg(2000);
BENCHMARK(BM_pairwise)->Args({500, 2})->Args({2000, 785});
BENCHMARK(BM_pairwise_serial)->Args({500, 2})->Args({2000, 785});
BENCHMARK(BM_greedy_match)->Arg(500)->Arg(2000);
BENCHMARK(BM_hungarian)->Arg(200)->Arg(500);

int main(int argc, char** argv) {
  kernels::apply_thread_limit_from_env();
  benchmark::Initialize(&argc, argv);
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
