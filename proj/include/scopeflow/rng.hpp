#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "scopeflow/error.hpp"

namespace scopeflow {

/// Counter-based pseudo-random stream.
///
/// Every draw is a pure function of (seed, stream, counter): the key is a
/// mixed combination of seed and stream id and each draw hashes key plus the
/// incremented counter through the SplitMix64 finalizer.  Distribution
/// sampling is implemented here rather than with <random> distributions,
/// whose algorithms are implementation-defined, so a seed reproduces the same
/// integer draws on every platform.  Real-valued draws use only IEEE basic
/// operations except normal(), which depends on libm log/cos.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream), key_(mix(seed ^ mix(stream + kGolden))) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }
  std::uint64_t counter() const noexcept { return counter_; }

  /// Independent child stream; splitting does not advance the parent.
  Rng split(std::uint64_t index) const noexcept {
    return Rng(mix(key_ ^ mix(index * kGolden + 0x632BE59BD9B4E019ULL)), index);
  }

  std::uint64_t next_u64() noexcept { return mix(key_ + (++counter_) * kGolden); }

  /// Uniform integer on the closed interval [lo, hi] (unbiased).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    if (hi < lo) throw Error(ErrorCode::OutOfRange, "uniform_int: empty range");
    const std::uint64_t range = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
    if (range == 0) return static_cast<std::int64_t>(next_u64());  // full 64-bit span
    const std::uint64_t threshold = (0 - range) % range;
    for (;;) {
      const std::uint64_t x = next_u64();
      const unsigned __int128 m = static_cast<unsigned __int128>(x) * range;
      if (static_cast<std::uint64_t>(m) >= threshold)
        return lo + static_cast<std::int64_t>(m >> 64);
    }
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on [a, b]; returns a exactly when a == b.
  double uniform(double a, double b) noexcept { return a + (b - a) * uniform01(); }

  bool bernoulli(double p) noexcept { return uniform01() < p; }

  /// Standard normal via Box-Muller (one output per two draws).
  double normal() noexcept {
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace scopeflow
