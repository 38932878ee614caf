#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "mixintent/error.hpp"
#include "mixintent/gradcheck.hpp"
#include "mixintent/linalg.hpp"
#include "mixintent/numerics.hpp"
#include "mixintent/rng.hpp"

using namespace mixintent;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, RngStream& rng) {
  Matrix m(r, c);
  for (double& x : m.flat()) x = rng.uniform(-1.0, 1.0);
  return m;
}

// Independent oracle: singular values as square roots of the eigenvalues of
// M^T M from Eigen's self-adjoint solver.
std::vector<double> oracle_singular_values(const Matrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(e.transpose() * e);
  std::vector<double> s;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) s.push_back(std::sqrt(std::max(0.0, solver.eigenvalues()[i])));
  std::sort(s.rbegin(), s.rend());
  return s;
}

double max_abs_offset_from_identity(const Matrix& q) {
  const Matrix g = transpose_multiply(q, q);
  double worst = 0.0;
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = 0; j < g.cols(); ++j) worst = std::max(worst, std::fabs(g(i, j) - (i == j ? 1.0 : 0.0)));
  return worst;
}

}  // namespace

TEST_CASE("cosine similarity examples") {
  CHECK(cosine_similarity(DenseVector{1, 2, 3}, DenseVector{1, 2, 3}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(cosine_similarity(DenseVector{1, 0}, DenseVector{0, 1}) == 0.0);
  CHECK(std::fabs(cosine_similarity(DenseVector{1, 0}, DenseVector{1, 1}) - 0.7071067812) <= 1e-9);
  CHECK(cosine_similarity(DenseVector{0, 0}, DenseVector{1, 1}) == 0.0);
  CHECK_THROWS_AS(cosine_similarity(DenseVector{1, 0}, DenseVector{1, 1, 1}), DimensionError);
}

TEST_CASE("cosine similarity invariants") {
  RngStream rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    DenseVector a(9), b(9);
    for (std::size_t i = 0; i < 9; ++i) {
      a[i] = rng.uniform(-2, 2);
      b[i] = rng.uniform(-2, 2);
    }
    const double c = rng.uniform(0.01, 50.0);
    DenseVector ca = a;
    for (double& x : ca) x *= c;
    CHECK(std::fabs(cosine_similarity(a, a) - 1.0) <= 1e-12);
    CHECK(std::fabs(cosine_similarity(ca, b) - cosine_similarity(a, b)) <= 1e-12);
    const double s = cosine_similarity(a, b);
    CHECK(s >= -1.0);
    CHECK(s <= 1.0);
  }
}

TEST_CASE("sparse vector invariants are enforced") {
  CHECK_NOTHROW(SparseVector(5, {{0, 1.0}, {3, 2.0}}));
  CHECK_THROWS_AS(SparseVector(5, {{3, 1.0}, {1, 2.0}}), ArgumentError);
  CHECK_THROWS_AS(SparseVector(5, {{1, 1.0}, {1, 2.0}}), ArgumentError);
  CHECK_THROWS_AS(SparseVector(5, {{5, 1.0}}), DimensionError);
  CHECK_THROWS_AS(SparseVector(5, {{2, 0.0}}), ArgumentError);
  const SparseVector v(4, {{1, 3.0}, {3, 4.0}});
  CHECK(v.norm() == 5.0);
  CHECK(v.to_dense() == DenseVector{0, 3, 0, 4});
}

TEST_CASE("matrix storage must match its shape") {
  CHECK_THROWS_AS(Matrix(2, 3, std::vector<double>(5)), DimensionError);
  const Matrix a = Matrix::from_rows({{1, 2}, {3, 4}});
  const Matrix b = Matrix::from_rows({{5, 6}, {7, 8}});
  CHECK(multiply(a, b) == Matrix::from_rows({{19, 22}, {43, 50}}));
  CHECK(transpose_multiply(a, b) == Matrix::from_rows({{26, 30}, {38, 44}}));
}

TEST_CASE("truncated_svd fixed examples") {
  SUBCASE("identity") {
    const SvdResult r = truncated_svd(Matrix::identity(3), 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::fabs(r.s[i] - 1.0) <= 1e-12);
  }
  SUBCASE("diagonal") {
    const SvdResult r = truncated_svd(Matrix::from_rows({{3, 0, 0}, {0, 2, 0}, {0, 0, 1}}), 2);
    REQUIRE(r.s.size() == 2);
    CHECK(std::fabs(r.s[0] - 3.0) <= 1e-12);
    CHECK(std::fabs(r.s[1] - 2.0) <= 1e-12);
  }
  SUBCASE("k out of range") {
    CHECK_THROWS_AS(truncated_svd(Matrix::identity(3), 0), ArgumentError);
    CHECK_THROWS_AS(truncated_svd(Matrix::identity(3), 4), ArgumentError);
  }
}

TEST_CASE("truncated_svd matches the eigen oracle on seeded 6x4") {
  RngStream rng(11);
  const Matrix m = random_matrix(6, 4, rng);
  const SvdResult r = truncated_svd(m, 4);
  const auto oracle = oracle_singular_values(m);
  for (std::size_t i = 0; i < 4; ++i) CHECK(std::fabs(r.s[i] - oracle[i]) <= 1e-8);
  CHECK(max_abs_offset_from_identity(r.u) <= 1e-8);
  CHECK(max_abs_offset_from_identity(r.v) <= 1e-8);
  CHECK(frobenius_distance(reconstruct(r), m) <= 1e-8);
}

TEST_CASE("truncated_svd reconstruction error is nonincreasing in k and vanishes at rank") {
  RngStream rng(5);
  for (auto [rows, cols] : {std::pair{7, 5}, std::pair{4, 8}}) {
    const Matrix m = random_matrix(rows, cols, rng);
    const std::size_t full = std::min<std::size_t>(rows, cols);
    double previous = INFINITY;
    for (std::size_t k = 1; k <= full; ++k) {
      const SvdResult r = truncated_svd(m, k);
      for (std::size_t i = 1; i < k; ++i) CHECK(r.s[i] <= r.s[i - 1]);
      const double err = frobenius_distance(reconstruct(r), m);
      CHECK(err <= previous + 1e-12);
      previous = err;
    }
    CHECK(previous <= 1e-8);
  }
}

TEST_CASE("truncated_svd handles rank-deficient input") {
  // rank 2: third column = first + second
  const Matrix m = Matrix::from_rows({{1, 2, 3}, {4, 5, 9}, {7, 8, 15}, {1, 0, 1}});
  const SvdResult r = truncated_svd(m, 3);
  CHECK(r.s[2] <= 1e-6);
  CHECK(max_abs_offset_from_identity(r.u) <= 1e-8);
  CHECK(max_abs_offset_from_identity(r.v) <= 1e-8);
  CHECK(frobenius_distance(reconstruct(truncated_svd(m, 2)), m) <= 1e-8);
}

TEST_CASE("randomized path agrees with the exact path on a low-rank matrix") {
  RngStream rng(3);
  const Matrix left = random_matrix(60, 5, rng);
  const Matrix right = random_matrix(5, 40, rng);
  const Matrix m = multiply(left, right);
  SvdOptions forced;
  forced.randomized_threshold = 10;
  const SvdResult fast = truncated_svd(m, 5, forced);
  const SvdResult exact = truncated_svd(m, 5);
  CHECK(fast.randomized);
  CHECK_FALSE(exact.randomized);
  for (std::size_t i = 0; i < 5; ++i) CHECK(std::fabs(fast.s[i] - exact.s[i]) <= 1e-8 * exact.s[0]);
  CHECK(max_abs_offset_from_identity(fast.u) <= 1e-8);
  CHECK(max_abs_offset_from_identity(fast.v) <= 1e-8);
}

TEST_CASE("Jacobi reports non-convergence with its sweep count") {
  RngStream rng(9);
  Matrix m = random_matrix(6, 6, rng);
  const Matrix sym = transpose_multiply(m, m);
  try {
    symmetric_eigen(sym, 1);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.iterations() == 1);
  }
}

TEST_CASE("rng streams are reproducible and derived streams are independent of draw order") {
  RngStream a(42), b(42);
  for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());

  RngStream parent(42);
  const RngStream child_before = parent.derive("tree-3");
  for (int i = 0; i < 17; ++i) parent.next_u64();
  RngStream child_after = parent.derive("tree-3");
  RngStream copy = child_before;
  for (int i = 0; i < 100; ++i) REQUIRE(copy.next_u64() == child_after.next_u64());

  // First outputs of SplitMix64 seeded with 0 are published reference values.
  RngStream zero(0);
  CHECK(zero.next_u64() == 0xE220A8397B1DCDAFULL);
  CHECK(zero.next_u64() == 0x6E789E6AA1B965F4ULL);

  RngStream u(1);
  for (int i = 0; i < 1000; ++i) {
    const double x = u.uniform();
    REQUIRE(x >= 0.0);
    REQUIRE(x < 1.0);
    REQUIRE(u.below(7) < 7);
  }
}

TEST_CASE("finite_diff_grad on x^2") {
  const ScalarObjective f = [](std::span<const double> t) { return t[0] * t[0]; };
  const std::vector<double> theta{3.0};
  const DenseVector g = finite_diff_grad(f, theta, 1e-5);
  CHECK(std::fabs(g[0] - 6.0) <= 1e-6);
}

TEST_CASE("finite_diff_grad rejects non-finite objectives") {
  const ScalarObjective f = [](std::span<const double> t) { return std::log(t[0]); };
  const std::vector<double> theta{0.0};
  CHECK_THROWS_AS(finite_diff_grad(f, theta, 1e-5), NumericError);
}

namespace {

// Softmax cross-entropy of a C x d weight matrix on one example.
struct SoftmaxCe {
  std::vector<double> x;
  std::size_t label;
  std::size_t classes;

  double loss(std::span<const double> w) const {
    std::vector<double> z(classes);
    for (std::size_t c = 0; c < classes; ++c)
      for (std::size_t j = 0; j < x.size(); ++j) z[c] += w[c * x.size() + j] * x[j];
    const double mx = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - mx);
    return -(z[label] - mx - std::log(sum));
  }

  std::vector<double> gradient(std::span<const double> w) const {
    std::vector<double> z(classes);
    for (std::size_t c = 0; c < classes; ++c)
      for (std::size_t j = 0; j < x.size(); ++j) z[c] += w[c * x.size() + j] * x[j];
    const double mx = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double& v : z) sum += (v = std::exp(v - mx));
    std::vector<double> g(w.size());
    for (std::size_t c = 0; c < classes; ++c) {
      const double delta = z[c] / sum - (c == label ? 1.0 : 0.0);
      for (std::size_t j = 0; j < x.size(); ++j) g[c * x.size() + j] = delta * x[j];
    }
    return g;
  }
};

}  // namespace

TEST_CASE("gradient check accepts a correct softmax gradient and catches an injected fault") {
  RngStream rng(123);
  SoftmaxCe problem{{0.3, -1.2, 0.8, 2.0}, 2, 3};
  std::vector<double> theta(12);
  for (double& t : theta) t = rng.uniform(-1, 1);
  const ScalarObjective f = [&](std::span<const double> w) { return problem.loss(w); };

  auto analytic = problem.gradient(theta);
  const GradCheckResult good = check_gradient(f, analytic, theta);
  CHECK(good.passed);
  CHECK(good.max_relative_error <= 1e-4);

  analytic[5] += 0.1;
  const GradCheckResult bad = check_gradient(f, analytic, theta);
  CHECK_FALSE(bad.passed);
  CHECK(bad.max_relative_error > 1e-2);
  CHECK(bad.worst_index == 5);
}
