#include "mixintent/simd.hpp"

namespace mixintent::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double squared_distance_scalar(const double* a, const double* b, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

void scale_scalar(double alpha, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

}  // namespace

const KernelTable& scalar_kernels() {
  static constexpr KernelTable table{dot_scalar, axpy_scalar, squared_distance_scalar, scale_scalar};
  return table;
}

}  // namespace mixintent::simd
