#pragma once

// Fixed-point decimal with an 18-digit fractional part (mantissa / 10^18).
//
// All protocol-side quantities (rates, balances, indices) use this type so that
// replays are bit-exact. Multiplication and division round toward negative
// infinity. Intermediate products are formed at 256-bit width; the stored
// mantissa is 128-bit and any result that does not fit raises Overflow.

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

#include "plflab/error.hpp"

namespace plf {

using Int128 = __int128;

class FixedDec {
 public:
  static constexpr Int128 kScale = static_cast<Int128>(1'000'000'000'000'000'000LL);
  static constexpr int kDecimals = 18;

  constexpr FixedDec() = default;

  static constexpr FixedDec from_mantissa(Int128 mantissa) {
    FixedDec out;
    out.mantissa_ = mantissa;
    return out;
  }
  static FixedDec from_int(std::int64_t n) { return from_mantissa(static_cast<Int128>(n) * kScale); }
  static constexpr FixedDec zero() { return from_mantissa(0); }
  static constexpr FixedDec one() { return from_mantissa(kScale); }

  /// Parses a decimal string such as "-12.5" or "0.000000000000000001".
  /// At most 18 fractional digits are accepted.
  static FixedDec parse(std::string_view text);
  /// Parses an integer mantissa string ("900000000000000000" or "9e17").
  static FixedDec parse_mantissa(std::string_view text);
  /// floor(x * 10^18). Throws Overflow for non-finite or out-of-range input.
  static FixedDec from_double(double x);

  constexpr Int128 mantissa() const { return mantissa_; }

  /// Projection to binary floating point; within 1 ulp of the exact value.
  double to_double() const;
  /// Exactly 18 fractional digits, e.g. "1.050000000000000000".
  std::string to_string() const;
  std::string mantissa_string() const;

  constexpr bool is_zero() const { return mantissa_ == 0; }
  constexpr bool is_negative() const { return mantissa_ < 0; }

  friend constexpr bool operator==(FixedDec, FixedDec) = default;
  friend constexpr std::strong_ordering operator<=>(FixedDec a, FixedDec b) {
    return a.mantissa_ <=> b.mantissa_;
  }

  FixedDec operator-() const;
  FixedDec& operator+=(FixedDec rhs);
  FixedDec& operator-=(FixedDec rhs);
  friend FixedDec operator+(FixedDec a, FixedDec b) { return a += b; }
  friend FixedDec operator-(FixedDec a, FixedDec b) { return a -= b; }

 private:
  Int128 mantissa_ = 0;
};

/// floor(a * b / 10^18)
FixedDec mul(FixedDec a, FixedDec b);
/// floor(a * 10^18 / b)
FixedDec div(FixedDec a, FixedDec b);
/// floor(a * b / c) computed from the exact wide product.
FixedDec mul_div(FixedDec a, FixedDec b, FixedDec c);
/// Repeated squaring with mul; pow_u(a, 0) == 1.
FixedDec pow_u(FixedDec a, std::uint64_t n);
/// Exact scaling by an integer.
FixedDec mul_int(FixedDec a, std::int64_t n);

/// floor(sum(values[i] * weights[i]) / sum(weights)), exact wide accumulation.
/// Throws DivisionByZero when the weights sum to zero.
FixedDec weighted_average(std::span<const FixedDec> values, std::span<const FixedDec> weights);

/// floor(sum(a[i] * b[i]) / 10^18), one rounding for the whole sum.
FixedDec dot(std::span<const FixedDec> a, std::span<const FixedDec> b);

/// Exact comparison of sum(a[i]*b[i]) against c*d (all at full precision).
std::strong_ordering compare_dot(std::span<const FixedDec> a, std::span<const FixedDec> b,
                                 FixedDec c, FixedDec d);

FixedDec min(FixedDec a, FixedDec b);
FixedDec max(FixedDec a, FixedDec b);

std::string int128_to_string(Int128 v);

std::ostream& operator<<(std::ostream& os, FixedDec v);

}  // namespace plf
