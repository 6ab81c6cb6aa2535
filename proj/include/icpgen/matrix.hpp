#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace icpgen {

// Dense row-major matrix of doubles. Rows are samples, columns are
// coordinates, so a Matrix doubles as a batch of equal-dimension vectors.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return rows_ == 0; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& storage() { return data_; }
  const std::vector<double>& storage() const { return data_; }

  void fill(double value);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// A set of samples from an origin or target distribution, one per row.
using SampleBatch = Matrix;

// Row-wise concatenation [left | right]; both must have the same row count.
Matrix hconcat(const Matrix& left, const Matrix& right);

// Columns [first, first + count) of every row.
Matrix column_block(const Matrix& m, std::size_t first, std::size_t count);

// Rows selected by index, in the order given.
Matrix gather_rows(const Matrix& m, std::span<const std::size_t> indices);

}  // namespace icpgen
