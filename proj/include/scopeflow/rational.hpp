#pragma once

#include <cstdint>
#include <numeric>
#include <ostream>
#include <string>

#include "scopeflow/error.hpp"

namespace scopeflow {

/// Exact non-negative fraction kept in lowest terms.  Sampling probabilities
/// are counts of crop placements over the number of placements, so 64-bit
/// integers are ample for any realistic image.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t num, std::int64_t den = 1) : num_(num), den_(den) {
    if (den_ == 0) throw Error(ErrorCode::OutOfRange, "zero denominator");
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    const auto g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }

  constexpr std::int64_t num() const noexcept { return num_; }
  constexpr std::int64_t den() const noexcept { return den_; }

  constexpr double to_double() const noexcept {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

  std::string str() const { return std::to_string(num_) + "/" + std::to_string(den_); }

  friend constexpr Rational operator*(const Rational& a, const Rational& b) {
    // Cross-reduce first to keep intermediates small.
    const auto g1 = std::gcd(a.num_, b.den_);
    const auto g2 = std::gcd(b.num_, a.den_);
    const auto n1 = g1 ? a.num_ / g1 : a.num_;
    const auto d2 = g1 ? b.den_ / g1 : b.den_;
    const auto n2 = g2 ? b.num_ / g2 : b.num_;
    const auto d1 = g2 ? a.den_ / g2 : a.den_;
    return Rational(n1 * n2, d1 * d2);
  }

  friend constexpr Rational operator+(const Rational& a, const Rational& b) {
    const auto l = std::lcm(a.den_, b.den_);
    return Rational(a.num_ * (l / a.den_) + b.num_ * (l / b.den_), l);
  }

  friend constexpr bool operator==(const Rational&, const Rational&) = default;

  friend constexpr bool operator<(const Rational& a, const Rational& b) {
    return static_cast<__int128>(a.num_) * b.den_ < static_cast<__int128>(b.num_) * a.den_;
  }
  friend constexpr bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
  friend constexpr bool operator>(const Rational& a, const Rational& b) { return b < a; }

  friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

}  // namespace scopeflow
