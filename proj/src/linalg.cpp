#include "mixintent/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "mixintent/error.hpp"
#include "mixintent/rng.hpp"
#include "mixintent/simd.hpp"

namespace mixintent {

EigenResult symmetric_eigen(const Matrix& input, std::size_t max_sweeps) {
  const std::size_t n = input.rows();
  require_same_size(n, input.cols(), "symmetric_eigen");
  Matrix a = input;
  Matrix v = Matrix::identity(n);

  auto off_diagonal = [&] {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) sum += a(i, j) * a(i, j);
    return std::sqrt(2.0 * sum);
  };
  const double scale = std::max(frobenius_norm(input), 1e-300);

  std::size_t sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    if (off_diagonal() <= 1e-15 * scale) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::fabs(apq) <= 1e-300) continue;
        const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::fabs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (sweep == max_sweeps && off_diagonal() > 1e-15 * scale) {
    throw ConvergenceError("Jacobi eigensolver did not converge", sweep);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  EigenResult out{DenseVector(n), Matrix(n, n), sweep};
  for (std::size_t c = 0; c < n; ++c) {
    out.values[c] = a(order[c], order[c]);
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, c) = v(r, order[c]);
  }
  return out;
}

namespace {

// Modified Gram-Schmidt over the columns of m, in place. Columns that vanish
// are replaced by a unit vector orthogonal to all earlier ones.
void orthonormalize_columns(Matrix& m) {
  const std::size_t rows = m.rows();
  const std::size_t cols = m.cols();
  Matrix t = m.transpose();  // columns as contiguous rows
  for (std::size_t c = 0; c < cols; ++c) {
    auto col = t.row(c);
    const double original = norm(col);
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t prev = 0; prev < c; ++prev) simd::axpy(-simd::dot(t.row(prev), col), t.row(prev), col);
    }
    double len = norm(col);
    if (len <= 1e-10 * std::max(original, 1.0)) {
      for (std::size_t e = 0; e < rows; ++e) {
        std::fill(col.begin(), col.end(), 0.0);
        col[e] = 1.0;
        for (int pass = 0; pass < 2; ++pass) {
          for (std::size_t prev = 0; prev < c; ++prev) simd::axpy(-simd::dot(t.row(prev), col), t.row(prev), col);
        }
        len = norm(col);
        if (len > 0.5) break;
      }
    }
    simd::scale(1.0 / len, col);
  }
  m = t.transpose();
}

// Given the eigenvectors of the Gram matrix on the small side, recover the
// other side as M * W / sigma and orthonormalize.
SvdResult from_gram(const Matrix& m, std::size_t k, bool gram_is_right, std::size_t max_sweeps) {
  const Matrix gram = gram_is_right ? transpose_multiply(m, m) : transpose_multiply(m.transpose(), m.transpose());
  const EigenResult eig = symmetric_eigen(gram, max_sweeps);
  const std::size_t small = gram.rows();
  const std::size_t large = gram_is_right ? m.rows() : m.cols();

  SvdResult out;
  out.s = DenseVector(k);
  Matrix known(small, k);
  // Gram eigenvalues carry absolute error ~ n * eps * lambda_max; anything
  // under that is a null direction, not a tiny singular value.
  const double null_floor = 8.0 * static_cast<double>(small) * std::numeric_limits<double>::epsilon() *
                            std::max(eig.values[0], 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    out.s[j] = eig.values[j] > null_floor ? std::sqrt(eig.values[j]) : 0.0;
    for (std::size_t r = 0; r < small; ++r) known(r, j) = eig.vectors(r, j);
  }
  // other = M * known (right Gram) or M^T * known (left Gram)
  Matrix other = gram_is_right ? multiply(m, known) : transpose_multiply(m, known);
  const double tiny = out.s[0] * 1e-13;
  for (std::size_t j = 0; j < k; ++j) {
    const double inv = out.s[j] > tiny && out.s[j] > 0.0 ? 1.0 / out.s[j] : 0.0;
    for (std::size_t r = 0; r < large; ++r) other(r, j) *= inv;
  }
  orthonormalize_columns(other);
  if (gram_is_right) {
    out.v = std::move(known);
    out.u = std::move(other);
  } else {
    out.u = std::move(known);
    out.v = std::move(other);
  }
  return out;
}

Matrix gaussian(std::size_t rows, std::size_t cols, RngStream& rng) {
  Matrix g(rows, cols);
  for (double& x : g.flat()) x = rng.normal();
  return g;
}

SvdResult randomized_svd(const Matrix& m, std::size_t k, const SvdOptions& options) {
  const std::size_t limit = std::min(m.rows(), m.cols());
  const std::size_t width = std::min(k + options.oversampling, limit);
  RngStream rng(options.seed);
  Matrix q = multiply(m, gaussian(m.cols(), width, rng));
  orthonormalize_columns(q);
  for (std::size_t it = 0; it < options.power_iterations; ++it) {
    Matrix z = transpose_multiply(m, q);
    orthonormalize_columns(z);
    q = multiply(m, z);
    orthonormalize_columns(q);
  }
  const Matrix b = transpose_multiply(q, m);  // width x n
  SvdResult small = from_gram(b, k, /*gram_is_right=*/false, options.max_sweeps);
  SvdResult out;
  out.u = multiply(q, small.u);
  orthonormalize_columns(out.u);
  out.s = std::move(small.s);
  out.v = std::move(small.v);
  out.randomized = true;
  return out;
}

}  // namespace

SvdResult truncated_svd(const Matrix& m, std::size_t k, const SvdOptions& options) {
  const std::size_t limit = std::min(m.rows(), m.cols());
  if (k == 0 || k > limit) {
    throw ArgumentError("truncated_svd: k=" + std::to_string(k) + " outside [1, " + std::to_string(limit) + "]");
  }
  require_finite(m.flat(), "truncated_svd input");
  SvdResult out;
  if (std::max(m.rows(), m.cols()) > options.randomized_threshold) {
    out = randomized_svd(m, k, options);
  } else {
    out = from_gram(m, k, /*gram_is_right=*/m.cols() <= m.rows(), options.max_sweeps);
  }
  require_finite(out.u.flat(), "truncated_svd U");
  require_finite(out.v.flat(), "truncated_svd V");
  return out;
}

Matrix reconstruct(const SvdResult& svd) {
  Matrix scaled = svd.u;
  for (std::size_t r = 0; r < scaled.rows(); ++r)
    for (std::size_t c = 0; c < scaled.cols(); ++c) scaled(r, c) *= svd.s[c];
  return multiply(scaled, svd.v.transpose());
}

}  // namespace mixintent
