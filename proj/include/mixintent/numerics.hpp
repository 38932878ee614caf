#pragma once

// Numeric carriers shared by every encoder and model: dense and sparse
// vectors plus a row-major matrix. All arithmetic is 64-bit.

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string_view>
#include <vector>

namespace mixintent {

class DenseVector {
 public:
  DenseVector() = default;
  explicit DenseVector(std::size_t n, double fill = 0.0) : values_(n, fill) {}
  DenseVector(std::initializer_list<double> values) : values_(values) {}
  explicit DenseVector(std::vector<double> values) : values_(std::move(values)) {}

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  double* data() noexcept { return values_.data(); }
  const double* data() const noexcept { return values_.data(); }
  std::span<double> span() noexcept { return values_; }
  std::span<const double> span() const noexcept { return values_; }
  operator std::span<const double>() const noexcept { return values_; }
  auto begin() noexcept { return values_.begin(); }
  auto end() noexcept { return values_.end(); }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }
  const std::vector<double>& values() const noexcept { return values_; }

  bool operator==(const DenseVector&) const = default;

 private:
  std::vector<double> values_;
};

class SparseVector {
 public:
  struct Entry {
    std::size_t index;
    double value;
    bool operator==(const Entry&) const = default;
  };

  SparseVector() = default;
  explicit SparseVector(std::size_t dim) : dim_(dim) {}
  // Validates strictly increasing indices below dim and nonzero values.
  SparseVector(std::size_t dim, std::vector<Entry> entries);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t nnz() const noexcept { return entries_.size(); }
  const std::vector<Entry>& entries() const noexcept { return entries_; }
  double norm() const;
  void scale(double alpha);
  DenseVector to_dense() const;
  void scatter_into(std::span<double> out) const;

  bool operator==(const SparseVector&) const = default;

 private:
  std::size_t dim_ = 0;
  std::vector<Entry> entries_;
};

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), values_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
  static Matrix identity(std::size_t n);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
  std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }
  std::span<double> flat() noexcept { return values_; }
  std::span<const double> flat() const noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }

  Matrix transpose() const;
  DenseVector column(std::size_t c) const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

// Throws DimensionError naming `what` when sizes differ.
void require_same_size(std::size_t a, std::size_t b, std::string_view what);
// Throws NumericError when any value is NaN or infinite.
void require_finite(std::span<const double> values, std::string_view what);

double norm(std::span<const double> v);

// a.b / (|a||b|); 0.0 when either norm is zero.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

// C = A * B
Matrix multiply(const Matrix& a, const Matrix& b);
// C = A^T * B
Matrix transpose_multiply(const Matrix& a, const Matrix& b);
// y = A * x
DenseVector multiply(const Matrix& a, std::span<const double> x);

double frobenius_norm(const Matrix& m);
double frobenius_distance(const Matrix& a, const Matrix& b);

}  // namespace mixintent
