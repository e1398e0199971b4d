#include "plflab/fixed_point.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>

namespace plf {

namespace {

using Wide = boost::multiprecision::int256_t;
using Wider = boost::multiprecision::checked_int512_t;

constexpr Int128 kInt128Max = static_cast<Int128>((~static_cast<unsigned __int128>(0)) >> 1);
constexpr Int128 kInt128Min = -kInt128Max - 1;

Wide to_wide(Int128 v) {
  // Boost converts from __int128 natively, but going through two 64-bit halves
  // keeps us independent of BOOST_HAS_INT128.
  const bool neg = v < 0;
  unsigned __int128 mag = neg ? static_cast<unsigned __int128>(-(v + 1)) + 1u
                              : static_cast<unsigned __int128>(v);
  Wide out = static_cast<std::uint64_t>(mag >> 64);
  out <<= 64;
  out += static_cast<std::uint64_t>(mag);
  return neg ? Wide(-out) : out;
}

template <class W>
Int128 narrow(const W& w, const char* op) {
  if (w > W(to_wide(kInt128Max)) || w < W(to_wide(kInt128Min))) {
    throw Error(ErrorCode::Overflow, std::string(op) + " result exceeds 128-bit mantissa");
  }
  const bool neg = w < 0;
  W mag = neg ? W(-w) : w;
  const auto hi = static_cast<std::uint64_t>(mag >> 64);
  const auto lo = static_cast<std::uint64_t>(mag & W(std::numeric_limits<std::uint64_t>::max()));
  unsigned __int128 m = (static_cast<unsigned __int128>(hi) << 64) | lo;
  if (neg) return static_cast<Int128>(~m + 1u);
  return static_cast<Int128>(m);
}

// Quotient rounded toward negative infinity.
template <class W>
W floor_div(const W& num, const W& den) {
  W q = num / den;
  W r = num - q * den;
  if (r != 0 && ((r < 0) != (den < 0))) q -= 1;
  return q;
}

Int128 floor_div128(Int128 num, Int128 den) {
  Int128 q = num / den;
  Int128 r = num % den;
  if (r != 0 && ((r < 0) != (den < 0))) --q;
  return q;
}

Int128 pow10(int n) {
  Int128 v = 1;
  for (int i = 0; i < n; ++i) v *= 10;
  return v;
}

Int128 parse_digits(std::string_view digits, std::string_view original) {
  if (digits.empty()) throw Error(ErrorCode::ParseError, "no digits in '" + std::string(original) + "'");
  Int128 v = 0;
  for (char c : digits) {
    if (c < '0' || c > '9') {
      throw Error(ErrorCode::ParseError, "invalid character in '" + std::string(original) + "'");
    }
    if (__builtin_mul_overflow(v, static_cast<Int128>(10), &v) ||
        __builtin_add_overflow(v, static_cast<Int128>(c - '0'), &v)) {
      throw Error(ErrorCode::Overflow, "value '" + std::string(original) + "' exceeds 128-bit mantissa");
    }
  }
  return v;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string int128_to_string(Int128 v) {
  if (v == 0) return "0";
  const bool neg = v < 0;
  unsigned __int128 mag = neg ? static_cast<unsigned __int128>(-(v + 1)) + 1u
                              : static_cast<unsigned __int128>(v);
  std::string out;
  while (mag != 0) {
    out.push_back(static_cast<char>('0' + static_cast<int>(mag % 10)));
    mag /= 10;
  }
  if (neg) out.push_back('-');
  std::reverse(out.begin(), out.end());
  return out;
}

FixedDec FixedDec::parse(std::string_view text) {
  const std::string_view original = text;
  text = trim(text);
  bool neg = false;
  if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
    neg = text.front() == '-';
    text.remove_prefix(1);
  }
  if (text.empty()) throw Error(ErrorCode::ParseError, "no digits in '" + std::string(original) + "'");
  std::string_view int_part = text;
  std::string_view frac_part;
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    int_part = text.substr(0, dot);
    frac_part = text.substr(dot + 1);
    if (int_part.empty() && frac_part.empty()) {
      throw Error(ErrorCode::ParseError, "no digits in '" + std::string(original) + "'");
    }
  }
  if (frac_part.size() > static_cast<std::size_t>(kDecimals)) {
    throw Error(ErrorCode::ParseError, "more than 18 fractional digits in '" + std::string(original) + "'");
  }
  Int128 ip = int_part.empty() ? 0 : parse_digits(int_part, original);
  Int128 fp = frac_part.empty() ? 0 : parse_digits(frac_part, original);
  fp *= pow10(kDecimals - static_cast<int>(frac_part.size()));
  Int128 m = 0;
  if (__builtin_mul_overflow(ip, kScale, &m) || __builtin_add_overflow(m, fp, &m)) {
    throw Error(ErrorCode::Overflow, "value '" + std::string(original) + "' exceeds 128-bit mantissa");
  }
  return from_mantissa(neg ? -m : m);
}

FixedDec FixedDec::parse_mantissa(std::string_view text) {
  const std::string_view original = text;
  text = trim(text);
  bool neg = false;
  if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
    neg = text.front() == '-';
    text.remove_prefix(1);
  }
  int exponent = 0;
  if (auto e = text.find_first_of("eE"); e != std::string_view::npos) {
    std::string_view exp_text = text.substr(e + 1);
    auto [ptr, ec] = std::from_chars(exp_text.data(), exp_text.data() + exp_text.size(), exponent);
    if (ec != std::errc{} || ptr != exp_text.data() + exp_text.size() || exponent < 0 || exponent > 38) {
      throw Error(ErrorCode::ParseError, "bad exponent in '" + std::string(original) + "'");
    }
    text = text.substr(0, e);
  }
  Int128 m = parse_digits(text, original);
  for (int i = 0; i < exponent; ++i) {
    if (__builtin_mul_overflow(m, static_cast<Int128>(10), &m)) {
      throw Error(ErrorCode::Overflow, "value '" + std::string(original) + "' exceeds 128-bit mantissa");
    }
  }
  return from_mantissa(neg ? -m : m);
}

FixedDec FixedDec::from_double(double x) {
  if (!std::isfinite(x)) throw Error(ErrorCode::Overflow, "non-finite value");
  const long double scaled = std::floor(static_cast<long double>(x) * 1e18L);
  if (std::fabs(scaled) >= 1.7e38L) throw Error(ErrorCode::Overflow, "value exceeds 128-bit mantissa");
  return from_mantissa(static_cast<Int128>(scaled));
}

double FixedDec::to_double() const {
  // 1e18 is exact in the 64-bit significand of long double, so the only
  // roundings are the quotient and the final narrowing.
  return static_cast<double>(static_cast<long double>(mantissa_) / 1e18L);
}

std::string FixedDec::to_string() const {
  const bool neg = mantissa_ < 0;
  unsigned __int128 mag = neg ? static_cast<unsigned __int128>(-(mantissa_ + 1)) + 1u
                              : static_cast<unsigned __int128>(mantissa_);
  const auto scale = static_cast<unsigned __int128>(kScale);
  std::string ip = int128_to_string(static_cast<Int128>(mag / scale));
  std::string fp = int128_to_string(static_cast<Int128>(mag % scale));
  std::string out;
  out.reserve(ip.size() + 20);
  if (neg) out.push_back('-');
  out += ip;
  out.push_back('.');
  out.append(static_cast<std::size_t>(kDecimals) - fp.size(), '0');
  out += fp;
  return out;
}

std::string FixedDec::mantissa_string() const { return int128_to_string(mantissa_); }

FixedDec FixedDec::operator-() const {
  if (mantissa_ == kInt128Min) throw Error(ErrorCode::Overflow, "negation overflow");
  return from_mantissa(-mantissa_);
}

FixedDec& FixedDec::operator+=(FixedDec rhs) {
  if (__builtin_add_overflow(mantissa_, rhs.mantissa_, &mantissa_)) {
    throw Error(ErrorCode::Overflow, "addition overflow");
  }
  return *this;
}

FixedDec& FixedDec::operator-=(FixedDec rhs) {
  if (__builtin_sub_overflow(mantissa_, rhs.mantissa_, &mantissa_)) {
    throw Error(ErrorCode::Overflow, "subtraction overflow");
  }
  return *this;
}

FixedDec mul(FixedDec a, FixedDec b) {
  Int128 p = 0;
  if (!__builtin_mul_overflow(a.mantissa(), b.mantissa(), &p)) {
    return FixedDec::from_mantissa(floor_div128(p, FixedDec::kScale));
  }
  Wide wp = to_wide(a.mantissa()) * to_wide(b.mantissa());
  return FixedDec::from_mantissa(narrow(floor_div(wp, to_wide(FixedDec::kScale)), "mul"));
}

FixedDec div(FixedDec a, FixedDec b) {
  if (b.is_zero()) throw Error(ErrorCode::DivisionByZero, "fixed-point division by zero");
  Int128 p = 0;
  if (!__builtin_mul_overflow(a.mantissa(), FixedDec::kScale, &p)) {
    return FixedDec::from_mantissa(floor_div128(p, b.mantissa()));
  }
  Wide wp = to_wide(a.mantissa()) * to_wide(FixedDec::kScale);
  return FixedDec::from_mantissa(narrow(floor_div(wp, to_wide(b.mantissa())), "div"));
}

FixedDec mul_div(FixedDec a, FixedDec b, FixedDec c) {
  if (c.is_zero()) throw Error(ErrorCode::DivisionByZero, "mul_div by zero");
  Int128 p = 0;
  if (!__builtin_mul_overflow(a.mantissa(), b.mantissa(), &p)) {
    return FixedDec::from_mantissa(floor_div128(p, c.mantissa()));
  }
  Wide wp = to_wide(a.mantissa()) * to_wide(b.mantissa());
  return FixedDec::from_mantissa(narrow(floor_div(wp, to_wide(c.mantissa())), "mul_div"));
}

FixedDec pow_u(FixedDec a, std::uint64_t n) {
  FixedDec result = FixedDec::one();
  FixedDec base = a;
  while (n != 0) {
    if (n & 1u) result = mul(result, base);
    n >>= 1;
    if (n != 0) base = mul(base, base);
  }
  return result;
}

FixedDec mul_int(FixedDec a, std::int64_t n) {
  Int128 p = 0;
  if (__builtin_mul_overflow(a.mantissa(), static_cast<Int128>(n), &p)) {
    throw Error(ErrorCode::Overflow, "integer scaling overflow");
  }
  return FixedDec::from_mantissa(p);
}

FixedDec weighted_average(std::span<const FixedDec> values, std::span<const FixedDec> weights) {
  if (values.size() != weights.size()) {
    throw Error(ErrorCode::InvalidParameter, "values and weights differ in length");
  }
  Wider num = 0;
  Wider den = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    num += Wider(to_wide(values[i].mantissa())) * Wider(to_wide(weights[i].mantissa()));
    den += Wider(to_wide(weights[i].mantissa()));
  }
  if (den == 0) throw Error(ErrorCode::DivisionByZero, "weights sum to zero");
  return FixedDec::from_mantissa(narrow(floor_div(num, den), "weighted_average"));
}

FixedDec dot(std::span<const FixedDec> a, std::span<const FixedDec> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::InvalidParameter, "dot length mismatch");
  Wider sum = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sum += Wider(to_wide(a[i].mantissa())) * Wider(to_wide(b[i].mantissa()));
  }
  return FixedDec::from_mantissa(narrow(floor_div(sum, Wider(to_wide(FixedDec::kScale))), "dot"));
}

std::strong_ordering compare_dot(std::span<const FixedDec> a, std::span<const FixedDec> b, FixedDec c,
                                 FixedDec d) {
  if (a.size() != b.size()) throw Error(ErrorCode::InvalidParameter, "compare_dot length mismatch");
  Wider lhs = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    lhs += Wider(to_wide(a[i].mantissa())) * Wider(to_wide(b[i].mantissa()));
  }
  Wider rhs = Wider(to_wide(c.mantissa())) * Wider(to_wide(d.mantissa()));
  if (lhs < rhs) return std::strong_ordering::less;
  if (lhs > rhs) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

FixedDec min(FixedDec a, FixedDec b) { return b < a ? b : a; }
FixedDec max(FixedDec a, FixedDec b) { return a < b ? b : a; }

std::ostream& operator<<(std::ostream& os, FixedDec v) { return os << v.to_string(); }

}  // namespace plf
