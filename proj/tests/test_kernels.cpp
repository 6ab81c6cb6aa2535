#include <doctest.h>

#include <cstdlib>
#include <random>

#include "icpgen/kernels.hpp"
#include "oracles.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace icpgen;

namespace {

void check_close(const Matrix& a, const Matrix& b, double tol) {
  REQUIRE(a.rows() == b.rows());
  REQUIRE(a.cols() == b.cols());
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    worst = std::max(worst, std::abs(a.data()[k] - b.data()[k]));
  CHECK(worst <= tol);
}

}  // namespace

TEST_CASE("parallel kernels agree with the serial reference") {
  std::mt19937_64 rng(1);
  // Shapes on both sides of the parallel work threshold.
  for (auto [n, k, m] : {std::tuple{3, 4, 5}, std::tuple{257, 64, 96}, std::tuple{500, 50, 50}}) {
    const Matrix a = oracle::random_matrix(n, k, rng);
    const Matrix w = oracle::random_matrix(k, m, rng);
    std::vector<double> bias(m);
    for (double& b : bias) b = std::normal_distribution<double>(0, 1)(rng);

    Matrix fast(n, m), ref;
    kernels::affine(a, w, bias, fast);
    kernels::serial::affine(a, w, bias, ref);
    check_close(fast, ref, 1e-12);

    const Matrix delta = oracle::random_matrix(n, m, rng);
    Matrix mt(n, k), mt_ref;
    kernels::multiply_transposed(delta, w, mt);
    kernels::serial::multiply_transposed(delta, w, mt_ref);
    check_close(mt, mt_ref, 1e-12);

    Matrix tm(k, m), tm_ref;
    kernels::transposed_multiply(a, delta, tm);
    kernels::serial::transposed_multiply(a, delta, tm_ref);
    check_close(tm, tm_ref, 1e-10);

    const Matrix p = oracle::random_matrix(n, k, rng);
    Matrix d(n, n), d_ref;
    kernels::pairwise_sqeuclidean(a, p, d);
    kernels::serial::pairwise_sqeuclidean(a, p, d_ref);
    check_close(d, d_ref, 1e-12);
    for (int probe = 0; probe < 20; ++probe) {
      const std::size_t i = rng() % n, j = rng() % n;
      CHECK(std::abs(d(i, j) - oracle::sq_dist(a, i, p, j)) < 1e-12);
    }
  }
}

TEST_CASE("affine handles sparse inputs") {
  Matrix a{{0.0, 1.0, 0.0}, {0.0, 0.0, 0.0}};
  Matrix w{{1, 2}, {3, 4}, {5, 6}};
  Matrix out(2, 2);
  kernels::affine(a, w, std::vector<double>{0.5, -0.5}, out);
  CHECK(out == Matrix{{3.5, 3.5}, {0.5, -0.5}});
}

TEST_CASE("nearest_alive") {
  const Matrix c{{0.0}, {2.0}, {-2.0}, {5.0}};
  auto dist = [](std::span<const double> a, std::span<const double> b) {
    return (a[0] - b[0]) * (a[0] - b[0]);
  };
  const std::vector<double> q{0.0};
  std::vector<char> alive{1, 1, 1, 1};
  auto best = kernels::nearest_alive(q, c, alive, dist);
  CHECK(best.index == 0);
  alive[0] = 0;
  best = kernels::nearest_alive(q, c, alive, dist);
  CHECK(best.index == 1);  // tie with index 2
  CHECK(best.distance == 4.0);
  alive = {0, 0, 0, 0};
  CHECK(kernels::nearest_alive(q, c, alive, dist).index == std::numeric_limits<std::size_t>::max());
}

#ifdef _OPENMP
TEST_CASE("results do not depend on the thread count") {
  std::mt19937_64 rng(2);
  const Matrix a = oracle::random_matrix(600, 60, rng);
  const Matrix w = oracle::random_matrix(60, 70, rng);
  const Matrix p = oracle::random_matrix(600, 60, rng);
  const std::vector<double> bias(70, 0.25);
  std::vector<Matrix> affine_results, cost_results;
  for (int threads : {1, 2, 3, 4}) {
    omp_set_num_threads(threads);
    Matrix out(600, 70), d(600, 600);
    kernels::affine(a, w, bias, out);
    kernels::pairwise_sqeuclidean(a, p, d);
    affine_results.push_back(out);
    cost_results.push_back(d);
  }
  for (std::size_t k = 1; k < affine_results.size(); ++k) {
    CHECK(affine_results[k] == affine_results[0]);
    CHECK(cost_results[k] == cost_results[0]);
  }
}

TEST_CASE("ICPGEN_THREADS caps the thread count") {
  setenv("ICPGEN_THREADS", "1", 1);
  kernels::apply_thread_limit_from_env();
  CHECK(kernels::max_threads() == 1);
  unsetenv("ICPGEN_THREADS");
}
#endif
