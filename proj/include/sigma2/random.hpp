#pragma once

#include <cstdint>
#include <limits>

namespace sigma2 {

/// SplitMix64 generator (Steele, Lea, Flood 2014).
///
/// Every random sweep in the library and its tests draws from this stream so
/// that a single 64-bit seed reproduces a run bit-for-bit on any platform.
/// Floating-point draws use the top 53 bits, never a standard-library
/// distribution, whose algorithms are implementation-defined.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t seed = 0) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  constexpr double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  constexpr double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Independent child stream, used to give each sweep its own sequence.
  constexpr SplitMix64 fork() noexcept { return SplitMix64((*this)()); }

 private:
  std::uint64_t state_;
};

}  // namespace sigma2
