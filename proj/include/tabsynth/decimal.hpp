#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace tabsynth {

/// Exact decimal number backed by an unbounded rational.
///
/// Sums, differences and products of decimal literals stay exact. Quotients
/// stay exact as rationals; only rendering rounds, and only when the
/// expansion does not terminate (15 significant digits).
class Decimal {
 public:
  using Rational = boost::multiprecision::cpp_rational;
  using Integer = boost::multiprecision::cpp_int;

  Decimal() = default;
  Decimal(long long v) : value_(v) {}  // NOLINT(google-explicit-constructor)
  explicit Decimal(Rational r) : value_(std::move(r)) {}

  /// Parses `[+-]?digits[.digits]` or `[+-]?.digits`. No exponents, no
  /// separators.
  static std::optional<Decimal> parse(std::string_view text);

  /// Nearest 15-significant-digit decimal to a finite double.
  static std::optional<Decimal> from_double(double d);

  const Rational& rational() const { return value_; }
  double to_double() const;

  bool is_zero() const { return value_ == 0; }
  bool is_negative() const { return value_ < 0; }
  bool is_integer() const;
  /// True when the decimal expansion terminates.
  bool is_terminating() const;

  Decimal abs() const;
  /// Rounds half away from zero to an integer.
  Decimal round() const;

  /// Canonical rendering: no exponent, no trailing zeros, no thousands
  /// separators, "-" for negatives.
  std::string to_string() const;
  /// Canonical rendering with "," thousands grouping in the integer part.
  std::string to_grouped_string() const;

  friend Decimal operator+(const Decimal& a, const Decimal& b) { return Decimal(Rational(a.value_ + b.value_)); }
  friend Decimal operator-(const Decimal& a, const Decimal& b) { return Decimal(Rational(a.value_ - b.value_)); }
  friend Decimal operator*(const Decimal& a, const Decimal& b) { return Decimal(Rational(a.value_ * b.value_)); }
  /// Caller checks for a zero divisor.
  friend Decimal operator/(const Decimal& a, const Decimal& b) { return Decimal(Rational(a.value_ / b.value_)); }
  Decimal operator-() const { return Decimal(Rational(-value_)); }

  friend bool operator==(const Decimal& a, const Decimal& b) { return a.value_ == b.value_; }
  friend std::strong_ordering operator<=>(const Decimal& a, const Decimal& b) {
    if (a.value_ < b.value_) return std::strong_ordering::less;
    if (b.value_ < a.value_) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

 private:
  Rational value_{0};
};

/// |a - b| <= rel_tol * max(|a|, |b|), evaluated exactly.
bool approx_equal(const Decimal& a, const Decimal& b);

/// Relative tolerance used by boolean comparison roots.
inline constexpr long long kInverseRelativeTolerance = 1'000'000'000;  // 1e-9

}  // namespace tabsynth
