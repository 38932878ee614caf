#include "mixintent/numerics.hpp"

#include <cmath>
#include <string>

#include "mixintent/error.hpp"
#include "mixintent/simd.hpp"

namespace mixintent {

SparseVector::SparseVector(std::size_t dim, std::vector<Entry> entries) : dim_(dim), entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const Entry& e = entries_[i];
    if (e.index >= dim_) throw DimensionError("sparse index " + std::to_string(e.index) + " >= dim " + std::to_string(dim_));
    if (i > 0 && entries_[i - 1].index >= e.index) throw ArgumentError("sparse indices must be strictly increasing");
    if (e.value == 0.0) throw ArgumentError("sparse vector stores an explicit zero");
  }
}

double SparseVector::norm() const {
  double sum = 0.0;
  for (const Entry& e : entries_) sum += e.value * e.value;
  return std::sqrt(sum);
}

void SparseVector::scale(double alpha) {
  if (alpha == 0.0) {
    entries_.clear();
    return;
  }
  for (Entry& e : entries_) e.value *= alpha;
}

DenseVector SparseVector::to_dense() const {
  DenseVector out(dim_);
  scatter_into(out.span());
  return out;
}

void SparseVector::scatter_into(std::span<double> out) const {
  require_same_size(out.size(), dim_, "sparse scatter");
  for (const Entry& e : entries_) out[e.index] = e.value;
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    throw DimensionError("matrix storage holds " + std::to_string(values_.size()) + " values, expected " +
                         std::to_string(rows_ * cols_));
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  Matrix m(r, c);
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("ragged matrix initializer");
    std::size_t j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

DenseVector Matrix::column(std::size_t c) const {
  DenseVector out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, c);
  return out;
}

void require_same_size(std::size_t a, std::size_t b, std::string_view what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": size " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

void require_finite(std::span<const double> values, std::string_view what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw NumericError(std::string(what) + ": non-finite value");
  }
}

double norm(std::span<const double> v) { return std::sqrt(simd::dot(v, v)); }

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  require_same_size(a.size(), b.size(), "cosine_similarity");
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  const double c = simd::dot(a, b) / (na * nb);
  // Rounding can push |c| a hair past 1.
  return std::fmax(-1.0, std::fmin(1.0, c));
}

Matrix multiply(const Matrix& a, const Matrix& b) {
  require_same_size(a.cols(), b.rows(), "matrix multiply");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto out = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik != 0.0) simd::axpy(aik, b.row(k), out);
    }
  }
  return c;
}

Matrix transpose_multiply(const Matrix& a, const Matrix& b) {
  require_same_size(a.rows(), b.rows(), "transpose multiply");
  Matrix c(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    auto brow = b.row(k);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = a(k, i);
      if (aki != 0.0) simd::axpy(aki, brow, c.row(i));
    }
  }
  return c;
}

DenseVector multiply(const Matrix& a, std::span<const double> x) {
  require_same_size(a.cols(), x.size(), "matrix-vector multiply");
  DenseVector y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) y[i] = simd::dot(a.row(i), x);
  return y;
}

double frobenius_norm(const Matrix& m) { return norm(m.flat()); }

double frobenius_distance(const Matrix& a, const Matrix& b) {
  require_same_size(a.rows(), b.rows(), "frobenius distance rows");
  require_same_size(a.cols(), b.cols(), "frobenius distance cols");
  return std::sqrt(simd::squared_distance(a.flat(), b.flat()));
}

}  // namespace mixintent
