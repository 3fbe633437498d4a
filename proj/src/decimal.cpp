#include "tabsynth/decimal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace tabsynth {

namespace mp = boost::multiprecision;

namespace {

constexpr int kSignificantDigits = 15;

Decimal::Integer pow10(int n) {
  Decimal::Integer r = 1;
  for (int i = 0; i < n; ++i) r *= 10;
  return r;
}

// Renders magnitude / 10^scale (scale may be negative).
std::string render_scaled(Decimal::Integer magnitude, int scale, bool negative) {
  if (scale < 0) {
    magnitude *= pow10(-scale);
    scale = 0;
  }
  std::string digits = magnitude.str();
  if (scale > 0) {
    if (static_cast<int>(digits.size()) <= scale) {
      digits.insert(0, static_cast<std::size_t>(scale) - digits.size() + 1, '0');
    }
    digits.insert(digits.size() - static_cast<std::size_t>(scale), 1, '.');
    while (digits.back() == '0') digits.pop_back();
    if (digits.back() == '.') digits.pop_back();
  }
  if (negative && digits != "0") digits.insert(0, 1, '-');
  return digits;
}

}  // namespace

std::optional<Decimal> Decimal::parse(std::string_view text) {
  std::size_t i = 0;
  bool negative = false;
  if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
    negative = text[i] == '-';
    ++i;
  }
  Integer mantissa = 0;
  int scale = 0;
  bool any_digit = false;
  bool seen_point = false;
  for (; i < text.size(); ++i) {
    char c = text[i];
    if (c >= '0' && c <= '9') {
      mantissa = mantissa * 10 + (c - '0');
      any_digit = true;
      if (seen_point) ++scale;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      return std::nullopt;
    }
  }
  if (!any_digit || (seen_point && scale == 0)) return std::nullopt;
  Rational r(mantissa, pow10(scale));
  if (negative) r = -r;
  return Decimal(std::move(r));
}

std::optional<Decimal> Decimal::from_double(double d) {
  if (!std::isfinite(d)) return std::nullopt;
  if (d == 0.0) return Decimal(0);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*e", kSignificantDigits - 1, d);
  std::string s(buf);
  auto e_pos = s.find('e');
  std::string mant = s.substr(0, e_pos);
  int exponent = std::atoi(s.c_str() + e_pos + 1);
  mant.erase(std::remove(mant.begin(), mant.end(), '.'), mant.end());
  bool negative = !mant.empty() && mant[0] == '-';
  if (negative) mant.erase(0, 1);
  Integer m(mant);
  int shift = exponent - (kSignificantDigits - 1);
  Rational r = shift >= 0 ? Rational(m * pow10(shift)) : Rational(m, pow10(-shift));
  if (negative) r = -r;
  return Decimal(std::move(r));
}

double Decimal::to_double() const { return value_.convert_to<double>(); }

bool Decimal::is_integer() const { return mp::denominator(value_) == 1; }

bool Decimal::is_terminating() const {
  Integer den = mp::denominator(value_);
  while (den % 2 == 0) den /= 2;
  while (den % 5 == 0) den /= 5;
  return den == 1;
}

Decimal Decimal::abs() const { return Decimal(Rational(mp::abs(value_))); }

Decimal Decimal::round() const {
  Integer num = mp::abs(mp::numerator(value_));
  Integer den = mp::denominator(value_);
  Integer q = (2 * num + den) / (2 * den);
  return Decimal(value_ < 0 ? Rational(-q) : Rational(q));
}

std::string Decimal::to_string() const {
  const bool negative = value_ < 0;
  Integer num = mp::abs(mp::numerator(value_));
  Integer den = mp::denominator(value_);
  if (is_terminating()) {
    int twos = 0, fives = 0;
    Integer d = den;
    while (d % 2 == 0) { d /= 2; ++twos; }
    while (d % 5 == 0) { d /= 5; ++fives; }
    int scale = std::max(twos, fives);
    return render_scaled(num * pow10(scale) / den, scale, negative);
  }
  // Non-terminating: round to kSignificantDigits significant digits.
  int exponent = 0;  // 10^exponent <= |x| < 10^(exponent+1)
  Integer integer_part = num / den;
  if (integer_part > 0) {
    exponent = static_cast<int>(integer_part.str().size()) - 1;
  } else {
    Integer n = num;
    while (n < den) {
      n *= 10;
      --exponent;
    }
  }
  int scale = kSignificantDigits - 1 - exponent;
  Integer scaled_num = scale >= 0 ? num * pow10(scale) : num;
  Integer scaled_den = scale >= 0 ? den : den * pow10(-scale);
  Integer rounded = (2 * scaled_num + scaled_den) / (2 * scaled_den);
  return render_scaled(rounded, scale, negative);
}

std::string Decimal::to_grouped_string() const {
  std::string s = to_string();
  std::size_t start = (!s.empty() && s[0] == '-') ? 1 : 0;
  std::size_t end = s.find('.');
  if (end == std::string::npos) end = s.size();
  for (std::size_t pos = end; pos > start + 3; pos -= 3) s.insert(pos - 3, 1, ',');
  return s;
}

bool approx_equal(const Decimal& a, const Decimal& b) {
  Decimal::Rational diff = mp::abs(a.rational() - b.rational());
  Decimal::Rational scale = std::max(mp::abs(a.rational()), mp::abs(b.rational()));
  return diff * kInverseRelativeTolerance <= scale;
}

}  // namespace tabsynth
