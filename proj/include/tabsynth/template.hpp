#pragma once

#include "tabsynth/program.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tabsynth {

struct ColumnPlaceholderInfo {
  int index = 0;
  SlotType type = SlotType::Any;
};

struct ValuePlaceholderInfo {
  enum class Role {
    ColumnValue,  // drawn from the cells of `column`
    Cell,         // arithmetic `valK`: a numeric cell addressed as `col of row`
    Claim,        // second argument of a claim comparison, decided after execution
  };
  int index = 0;
  Role role = Role::ColumnValue;
  std::optional<ColumnSlot> column;  // ColumnValue only
};

/// A program with unresolved placeholders, ready to be bound to any table.
struct ProgramTemplate {
  Program body;
  std::vector<ColumnPlaceholderInfo> columns;  // sorted by index
  std::vector<ValuePlaceholderInfo> values;    // sorted by index
  std::string canonical_key;
  double weight = 1.0;

  const ColumnPlaceholderInfo* column_info(int index) const;
  const ValuePlaceholderInfo* value_info(int index) const;
};

/// Parses template text. A `_number` suffix, or use in a numeric-only slot
/// (argmax, sum, table_average, ...), makes a column placeholder Number-typed.
/// Throws ParseError, ArityError, or DanglingValue.
ProgramTemplate parse_template(std::string_view text, Family family);

/// Family-prefixed print form with placeholders renumbered in first-occurrence
/// order. Invariant under placeholder renaming and whitespace.
std::string canonicalize(const ProgramTemplate& t);

/// Keeps the first template of every canonical key, preserving order.
std::vector<ProgramTemplate> dedupe_templates(std::vector<ProgramTemplate> templates);

/// Template pack: one `family|template` per line, `family*weight|template`
/// for a sampling weight, `#` comments and blank lines ignored. Throws
/// ConfigError naming the offending line.
std::vector<ProgramTemplate> parse_template_pack(std::string_view text);
std::vector<ProgramTemplate> load_template_pack(const std::string& path);

}  // namespace tabsynth
