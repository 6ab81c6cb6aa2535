#include <cstdlib>
#include <string>

#include "icpgen/errors.hpp"
#include "icpgen/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace icpgen::kernels {

namespace {

void require_shape(const Matrix& m, std::size_t rows, std::size_t cols, const char* what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw DimensionError(std::string(what) + ": output shape mismatch");
  }
}

}  // namespace

void affine(const Matrix& a, const Matrix& w, std::span<const double> bias, Matrix& out) {
  if (a.cols() != w.rows() || bias.size() != w.cols()) {
    throw DimensionError("affine: inner dimensions differ");
  }
  require_shape(out, a.rows(), w.cols(), "affine");
  const std::size_t inner = a.cols();
  const std::size_t width = w.cols();
  const auto n = static_cast<std::ptrdiff_t>(a.rows());
  const std::size_t work = a.rows() * inner * width;
#pragma omp parallel for schedule(static) if (work > kParallelWorkThreshold)
  for (std::ptrdiff_t r = 0; r < n; ++r) {
    double* dst = out.data() + static_cast<std::size_t>(r) * width;
    const double* src = a.data() + static_cast<std::size_t>(r) * inner;
    for (std::size_t j = 0; j < width; ++j) dst[j] = bias[j];
    for (std::size_t k = 0; k < inner; ++k) {
      const double ak = src[k];
      if (ak == 0.0) continue;
      const double* wk = w.data() + k * width;
      for (std::size_t j = 0; j < width; ++j) dst[j] += ak * wk[j];
    }
  }
}

void multiply_transposed(const Matrix& delta, const Matrix& w, Matrix& out) {
  if (delta.cols() != w.cols()) {
    throw DimensionError("multiply_transposed: inner dimensions differ");
  }
  require_shape(out, delta.rows(), w.rows(), "multiply_transposed");
  const std::size_t inner = delta.cols();
  const auto n = static_cast<std::ptrdiff_t>(delta.rows());
  const std::size_t work = delta.rows() * inner * w.rows();
#pragma omp parallel for schedule(static) if (work > kParallelWorkThreshold)
  for (std::ptrdiff_t r = 0; r < n; ++r) {
    const double* d = delta.data() + static_cast<std::size_t>(r) * inner;
    double* dst = out.data() + static_cast<std::size_t>(r) * w.rows();
    for (std::size_t i = 0; i < w.rows(); ++i) {
      const double* wi = w.data() + i * inner;
      double acc = 0.0;
      for (std::size_t o = 0; o < inner; ++o) acc += d[o] * wi[o];
      dst[i] = acc;
    }
  }
}

void transposed_multiply(const Matrix& a, const Matrix& delta, Matrix& out) {
  if (a.rows() != delta.rows()) {
    throw DimensionError("transposed_multiply: batch sizes differ");
  }
  require_shape(out, a.cols(), delta.cols(), "transposed_multiply");
  const std::size_t width = delta.cols();
  const auto n = static_cast<std::ptrdiff_t>(a.cols());
  const std::size_t work = a.rows() * a.cols() * width;
#pragma omp parallel for schedule(static) if (work > kParallelWorkThreshold)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto iu = static_cast<std::size_t>(i);
    double* dst = out.data() + iu * width;
    for (std::size_t j = 0; j < width; ++j) dst[j] = 0.0;
    for (std::size_t b = 0; b < a.rows(); ++b) {
      const double av = a(b, iu);
      if (av == 0.0) continue;
      const double* db = delta.data() + b * width;
      for (std::size_t j = 0; j < width; ++j) dst[j] += av * db[j];
    }
  }
}

void pairwise_sqeuclidean(const Matrix& t, const Matrix& p, Matrix& out) {
  if (t.cols() != p.cols()) {
    throw DimensionError("pairwise_sqeuclidean: dimensions differ");
  }
  require_shape(out, t.rows(), p.rows(), "pairwise_sqeuclidean");
  const std::size_t dim = t.cols();
  const auto n = static_cast<std::ptrdiff_t>(t.rows());
  const std::size_t work = t.rows() * p.rows() * dim;
#pragma omp parallel for schedule(static) if (work > kParallelWorkThreshold)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double* ti = t.data() + static_cast<std::size_t>(i) * dim;
    double* dst = out.data() + static_cast<std::size_t>(i) * p.rows();
    for (std::size_t j = 0; j < p.rows(); ++j) {
      const double* pj = p.data() + j * dim;
      double acc = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        const double diff = ti[k] - pj[k];
        acc += diff * diff;
      }
      dst[j] = acc;
    }
  }
}

void apply_thread_limit_from_env() {
#ifdef _OPENMP
  if (const char* env = std::getenv("ICPGEN_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && n > 0) omp_set_num_threads(static_cast<int>(n));
  }
#endif
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace icpgen::kernels
