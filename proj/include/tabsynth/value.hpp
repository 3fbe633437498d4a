#pragma once

#include "tabsynth/decimal.hpp"

#include <string>
#include <string_view>

namespace tabsynth {

/// A table cell or program literal: Number, Text or Empty.
///
/// Numbers remember the text they were parsed from so realized sentences can
/// quote the cell as it appears in the table ("$1,234", "45.2%").
class Value {
 public:
  enum class Kind { Empty, Number, Text };

  Value() = default;

  static Value empty() { return {}; }
  static Value text(std::string s);
  /// `surface` defaults to the canonical rendering plus `unit`.
  static Value number(Decimal d, std::string unit = {}, std::string surface = {});

  Kind kind() const { return kind_; }
  bool is_empty() const { return kind_ == Kind::Empty; }
  bool is_number() const { return kind_ == Kind::Number; }
  bool is_text() const { return kind_ == Kind::Text; }

  /// Requires is_number().
  const Decimal& number() const { return number_; }
  /// "%" for percentages, otherwise empty.
  const std::string& unit() const { return unit_; }
  /// Requires is_text().
  const std::string& text_value() const { return text_; }

  /// How the value reads in a table or sentence.
  std::string surface() const;
  /// Canonical rendering without unit or separators ("1234", "45.2").
  std::string canonical() const;

  /// Semantic equality: Numbers compare exactly by value (unit and surface
  /// ignored), Text by string, Empty only equals Empty.
  friend bool operator==(const Value& a, const Value& b);

  /// Semantic equality plus identical surface form.
  bool identical(const Value& other) const;

 private:
  Kind kind_ = Kind::Empty;
  Decimal number_;
  std::string unit_;
  std::string text_;  // Text content, or the Number's surface form.
};

/// Total cell parser: trims, maps blank / "n/a" / "-" to Empty, accepts an
/// optional sign, one leading currency symbol, "," thousands separators and
/// a trailing "%". Anything else is Text.
Value parse_value(std::string_view raw);

/// True when `text` mentions `v`: the surface form, the canonical rendering,
/// or the thousands-grouped rendering occurs as a substring.
bool mentions(std::string_view text, const Value& v);

std::string trim(std::string_view s);
/// Trims and collapses internal whitespace runs to one space.
std::string normalize_space(std::string_view s);
std::string to_lower(std::string_view s);

}  // namespace tabsynth
