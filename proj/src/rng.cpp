#include "mixintent/rng.hpp"

#include <cmath>
#include <numbers>

namespace mixintent {

namespace {
constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t label) noexcept {
  return splitmix64(splitmix64(seed + kGoldenGamma) ^ splitmix64(label * kGoldenGamma + 0x632BE59BD9B4E019ULL));
}

std::uint64_t mix_seed(std::uint64_t seed, std::string_view label) noexcept {
  // FNV-1a of the label, then the integer mix.
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return mix_seed(seed, h);
}

std::uint64_t RngStream::next_u64() noexcept {
  ++counter_;
  return splitmix64(seed_ + counter_ * kGoldenGamma);
}

double RngStream::uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::size_t RngStream::below(std::size_t n) noexcept {
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  std::uint64_t x = next_u64();
  while (x >= limit) x = next_u64();
  return static_cast<std::size_t>(x % bound);
}

double RngStream::normal() noexcept {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace mixintent
