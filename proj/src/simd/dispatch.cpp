#include <atomic>
#include <cstdlib>
#include <string>

#include "mixintent/error.hpp"
#include "mixintent/simd.hpp"

namespace mixintent::simd {

#ifndef MIXINTENT_HAVE_AVX2
const KernelTable* avx2_kernels() { return nullptr; }
#endif

namespace {

bool cpu_has_avx2() {
#if defined(MIXINTENT_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend detect() {
  if (const char* forced = std::getenv("MIXINTENT_SIMD")) {
    if (std::string(forced) == "scalar") return Backend::Scalar;
  }
  return cpu_has_avx2() ? Backend::Avx2 : Backend::Scalar;
}

const KernelTable& table_for(Backend backend) {
  return backend == Backend::Avx2 ? *avx2_kernels() : scalar_kernels();
}

struct State {
  std::atomic<Backend> backend{detect()};
  std::atomic<const KernelTable*> table{&table_for(backend.load())};
};

State& state() {
  static State s;
  return s;
}

}  // namespace

bool backend_available(Backend backend) {
  if (backend == Backend::Scalar) return true;
  return avx2_kernels() != nullptr && cpu_has_avx2();
}

Backend active_backend() { return state().backend.load(std::memory_order_relaxed); }

void set_backend(Backend backend) {
  if (!backend_available(backend)) {
    throw ArgumentError("SIMD backend '" + std::string(backend_name(backend)) + "' is not available on this CPU");
  }
  state().backend.store(backend);
  state().table.store(&table_for(backend));
}

std::string_view backend_name(Backend backend) { return backend == Backend::Avx2 ? "avx2" : "scalar"; }

const KernelTable& active() { return *state().table.load(std::memory_order_relaxed); }

}  // namespace mixintent::simd
