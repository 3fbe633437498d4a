#pragma once

#include "tabsynth/program.hpp"

#include <optional>
#include <string_view>

namespace tabsynth::detail {

/// Shared entry point of parse_program and parse_template. In template mode
/// `cK`, `cK_number` and `valK` read as placeholders.
Program parse(std::string_view text, Family family, bool template_mode);

std::optional<ColumnPlaceholder> match_column_placeholder(std::string_view word);
std::optional<int> match_value_placeholder(std::string_view word);

}  // namespace tabsynth::detail
