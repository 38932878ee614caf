#pragma once

#include <cstddef>
#include <cstdint>

#include "mixintent/numerics.hpp"

namespace mixintent {

struct EigenResult {
  DenseVector values;  // descending
  Matrix vectors;      // column i pairs with values[i]
  std::size_t sweeps = 0;
};

// Cyclic Jacobi eigendecomposition of a symmetric matrix.
// Throws ConvergenceError if the off-diagonal mass does not vanish within max_sweeps.
EigenResult symmetric_eigen(const Matrix& a, std::size_t max_sweeps = 100);

struct SvdOptions {
  // Above this size on either axis the randomized subspace path is used.
  std::size_t randomized_threshold = 2000;
  std::size_t oversampling = 10;
  std::size_t power_iterations = 4;
  std::size_t max_sweeps = 100;
  std::uint64_t seed = 0x5EEDu;
};

struct SvdResult {
  Matrix u;          // m x k, orthonormal columns
  DenseVector s;     // k values, nonnegative, nonincreasing
  Matrix v;          // n x k, orthonormal columns
  bool randomized = false;
};

// Best rank-k factorization M ~ U diag(S) V^T. Exact Gram-matrix Jacobi
// path for desk-scale inputs; randomized subspace iteration beyond
// SvdOptions::randomized_threshold.
SvdResult truncated_svd(const Matrix& m, std::size_t k, const SvdOptions& options = {});

// U diag(S) V^T
Matrix reconstruct(const SvdResult& svd);

}  // namespace mixintent
