#include "tabsynth/value.hpp"

#include <array>
#include <cctype>

namespace tabsynth {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

constexpr std::array<std::string_view, 6> kCurrencySymbols = {"$", "€", "£", "¥", "₹", "₩"};

// Digits with optional "," groups of exactly three, then an optional fraction.
bool strip_thousands(std::string_view body, std::string& out) {
  out.clear();
  std::size_t point = body.find('.');
  std::string_view integer = body.substr(0, point);
  if (integer.find(',') != std::string_view::npos) {
    std::size_t first = integer.find(',');
    if (first == 0 || first > 3) return false;
    std::size_t group_start = first + 1;
    while (group_start <= integer.size()) {
      std::size_t next = integer.find(',', group_start);
      std::size_t len = (next == std::string_view::npos ? integer.size() : next) - group_start;
      if (len != 3) return false;
      if (next == std::string_view::npos) break;
      group_start = next + 1;
    }
  }
  for (char c : body) {
    if (c != ',') out.push_back(c);
  }
  return true;
}

}  // namespace

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::string normalize_space(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

Value Value::text(std::string s) {
  Value v;
  v.kind_ = Kind::Text;
  v.text_ = std::move(s);
  return v;
}

Value Value::number(Decimal d, std::string unit, std::string surface) {
  Value v;
  v.kind_ = Kind::Number;
  v.number_ = std::move(d);
  v.unit_ = std::move(unit);
  v.text_ = std::move(surface);
  return v;
}

std::string Value::surface() const {
  switch (kind_) {
    case Kind::Empty: return {};
    case Kind::Text: return text_;
    case Kind::Number: return text_.empty() ? number_.to_string() + unit_ : text_;
  }
  return {};
}

std::string Value::canonical() const {
  return kind_ == Kind::Number ? number_.to_string() : surface();
}

bool operator==(const Value& a, const Value& b) {
  if (a.kind_ != b.kind_) return false;
  switch (a.kind_) {
    case Value::Kind::Empty: return true;
    case Value::Kind::Text: return a.text_ == b.text_;
    case Value::Kind::Number: return a.number_ == b.number_;
  }
  return false;
}

bool Value::identical(const Value& other) const {
  return *this == other && surface() == other.surface() && unit_ == other.unit_;
}

Value parse_value(std::string_view raw) {
  std::string s = trim(raw);
  if (s.empty()) return Value::empty();
  std::string lower = to_lower(s);
  if (lower == "n/a" || lower == "-") return Value::empty();

  std::string_view body = s;
  bool negative = false;
  auto take_sign = [&] {
    if (!body.empty() && (body.front() == '-' || body.front() == '+')) {
      negative = body.front() == '-';
      body.remove_prefix(1);
      return true;
    }
    return false;
  };
  bool signed_before = take_sign();
  for (std::string_view sym : kCurrencySymbols) {
    if (body.substr(0, sym.size()) == sym) {
      body.remove_prefix(sym.size());
      break;
    }
  }
  if (!signed_before) take_sign();
  std::string unit;
  if (!body.empty() && body.back() == '%') {
    unit = "%";
    body.remove_suffix(1);
  }
  std::string digits;
  if (body.empty() || body.front() == '+' || body.front() == '-' || !strip_thousands(body, digits)) {
    return Value::text(std::move(s));
  }
  auto d = Decimal::parse(digits);
  if (!d) return Value::text(std::move(s));
  if (negative) *d = -*d;
  return Value::number(std::move(*d), std::move(unit), std::move(s));
}

bool mentions(std::string_view text, const Value& v) {
  if (v.is_empty()) return true;
  std::string surface = v.surface();
  if (!surface.empty() && text.find(surface) != std::string_view::npos) return true;
  if (!v.is_number()) return false;
  return text.find(v.number().to_string()) != std::string_view::npos ||
         text.find(v.number().to_grouped_string()) != std::string_view::npos;
}

}  // namespace tabsynth
