// Textbook triple loops. Kept as the reference the OpenMP kernels are
// checked and benchmarked against.

#include "icpgen/errors.hpp"
#include "icpgen/kernels.hpp"

namespace icpgen::kernels::serial {

void affine(const Matrix& a, const Matrix& w, std::span<const double> bias, Matrix& out) {
  if (a.cols() != w.rows() || bias.size() != w.cols()) {
    throw DimensionError("serial::affine: inner dimensions differ");
  }
  out = Matrix(a.rows(), w.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t j = 0; j < w.cols(); ++j) {
      double acc = bias[j];
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a(r, k) * w(k, j);
      out(r, j) = acc;
    }
  }
}

void multiply_transposed(const Matrix& delta, const Matrix& w, Matrix& out) {
  if (delta.cols() != w.cols()) {
    throw DimensionError("serial::multiply_transposed: inner dimensions differ");
  }
  out = Matrix(delta.rows(), w.rows());
  for (std::size_t r = 0; r < delta.rows(); ++r) {
    for (std::size_t i = 0; i < w.rows(); ++i) {
      double acc = 0.0;
      for (std::size_t o = 0; o < w.cols(); ++o) acc += delta(r, o) * w(i, o);
      out(r, i) = acc;
    }
  }
}

void transposed_multiply(const Matrix& a, const Matrix& delta, Matrix& out) {
  if (a.rows() != delta.rows()) {
    throw DimensionError("serial::transposed_multiply: batch sizes differ");
  }
  out = Matrix(a.cols(), delta.cols());
  for (std::size_t i = 0; i < a.cols(); ++i) {
    for (std::size_t j = 0; j < delta.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t b = 0; b < a.rows(); ++b) acc += a(b, i) * delta(b, j);
      out(i, j) = acc;
    }
  }
}

void pairwise_sqeuclidean(const Matrix& t, const Matrix& p, Matrix& out) {
  if (t.cols() != p.cols()) {
    throw DimensionError("serial::pairwise_sqeuclidean: dimensions differ");
  }
  out = Matrix(t.rows(), p.rows());
  for (std::size_t i = 0; i < t.rows(); ++i) {
    for (std::size_t j = 0; j < p.rows(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < t.cols(); ++k) {
        acc += (t(i, k) - p(j, k)) * (t(i, k) - p(j, k));
      }
      out(i, j) = acc;
    }
  }
}

}  // namespace icpgen::kernels::serial
