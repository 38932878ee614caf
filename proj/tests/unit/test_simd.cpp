#include <cmath>
#include <vector>

#include "doctest.h"
#include "mixintent/rng.hpp"
#include "mixintent/simd.hpp"

using namespace mixintent;

namespace {

std::vector<double> random_values(std::size_t n, RngStream& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-3.0, 3.0);
  return v;
}

// Reductions differ only in summation order and FMA contraction.
double reduction_tolerance(const std::vector<double>& a, const std::vector<double>& b) {
  double mass = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) mass += std::fabs(a[i] * b[i]) + a[i] * a[i] + b[i] * b[i];
  return 1e-14 * (mass + 1.0);
}

}  // namespace

TEST_CASE("scalar and AVX2 kernels agree on every length and tail") {
  const simd::KernelTable* avx = simd::avx2_kernels();
  if (avx == nullptr || !simd::backend_available(simd::Backend::Avx2)) {
    MESSAGE("AVX2 not available; equivalence check skipped");
    return;
  }
  const simd::KernelTable& ref = simd::scalar_kernels();
  RngStream rng(2024);
  for (std::size_t n = 0; n <= 67; ++n) {
    CAPTURE(n);
    const auto a = random_values(n, rng);
    const auto b = random_values(n, rng);
    const double tol = reduction_tolerance(a, b);

    CHECK(std::fabs(ref.dot(a.data(), b.data(), n) - avx->dot(a.data(), b.data(), n)) <= tol);
    CHECK(std::fabs(ref.squared_distance(a.data(), b.data(), n) - avx->squared_distance(a.data(), b.data(), n)) <=
          tol);

    auto y_ref = b;
    auto y_avx = b;
    ref.axpy(0.37, a.data(), y_ref.data(), n);
    avx->axpy(0.37, a.data(), y_avx.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::fabs(y_ref[i] - y_avx[i]) <= 1e-15 * (1.0 + std::fabs(y_ref[i])));

    auto s_ref = a;
    auto s_avx = a;
    ref.scale(-1.75, s_ref.data(), n);
    avx->scale(-1.75, s_avx.data(), n);
    CHECK(s_ref == s_avx);
  }
}

TEST_CASE("backend switch routes the span helpers") {
  const simd::Backend original = simd::active_backend();
  std::vector<double> a{1, 2, 3, 4, 5};
  std::vector<double> b{5, 4, 3, 2, 1};

  simd::set_backend(simd::Backend::Scalar);
  CHECK(simd::active_backend() == simd::Backend::Scalar);
  CHECK(simd::dot(a, b) == 35.0);
  CHECK(simd::squared_distance(a, b) == 40.0);

  if (simd::backend_available(simd::Backend::Avx2)) {
    simd::set_backend(simd::Backend::Avx2);
    CHECK(simd::dot(a, b) == 35.0);
    CHECK(simd::squared_distance(a, b) == 40.0);
  }
  simd::set_backend(original);
}

TEST_CASE("backend names") {
  CHECK(simd::backend_name(simd::Backend::Scalar) == "scalar");
  CHECK(simd::backend_name(simd::Backend::Avx2) == "avx2");
}
