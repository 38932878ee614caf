#pragma once

// Runtime-dispatched inner-loop kernels. Every kernel has a scalar reference
// implementation; an AVX2+FMA variant is selected at startup when the CPU
// supports it. Set MIXINTENT_SIMD=scalar to force the reference path.

#include <cassert>
#include <cstddef>
#include <span>
#include <string_view>

namespace mixintent::simd {

enum class Backend { Scalar, Avx2 };

struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
  void (*scale)(double alpha, double* x, std::size_t n);
};

const KernelTable& scalar_kernels();
// nullptr when the binary was built without the AVX2 translation unit.
const KernelTable* avx2_kernels();

bool backend_available(Backend backend);
Backend active_backend();
// Throws ArgumentError if the backend is not available on this machine.
void set_backend(Backend backend);
std::string_view backend_name(Backend backend);

const KernelTable& active();

inline double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  active().axpy(alpha, x.data(), y.data(), x.size());
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return active().squared_distance(a.data(), b.data(), a.size());
}

inline void scale(double alpha, std::span<double> x) { active().scale(alpha, x.data(), x.size()); }

}  // namespace mixintent::simd
