#pragma once

// Counter-based SplitMix64 stream: draw n returns mix(seed + n * golden_gamma),
// so a stream is fully described by (seed, counter) and sequences agree
// bit-for-bit across platforms. Child streams are derived by seed mixing and
// never share state with their parent.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>

namespace mixintent {

std::uint64_t splitmix64(std::uint64_t x) noexcept;
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t label) noexcept;
std::uint64_t mix_seed(std::uint64_t seed, std::string_view label) noexcept;

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) noexcept : seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t counter() const noexcept { return counter_; }

  std::uint64_t next_u64() noexcept;
  // Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n); n must be positive. Rejection sampling, no modulo bias.
  std::size_t below(std::size_t n) noexcept;
  // Standard normal via Box-Muller (consumes two draws).
  double normal() noexcept;

  RngStream derive(std::uint64_t label) const noexcept { return RngStream(mix_seed(seed_, label)); }
  RngStream derive(std::string_view label) const noexcept { return RngStream(mix_seed(seed_, label)); }

  template <typename T>
  void shuffle(std::span<T> items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = below(i);
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace mixintent
