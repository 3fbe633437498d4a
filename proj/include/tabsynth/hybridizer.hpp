#pragma once

#include "tabsynth/executor.hpp"
#include "tabsynth/rng.hpp"
#include "tabsynth/table.hpp"

#include <map>
#include <optional>
#include <string>

namespace tabsynth {

struct SplitResult {
  Table sub_table;
  std::string sentence;
  std::size_t removed_row_index = 0;
  Row removed_row;
  CellRef anchor_cell;
};

struct ExpandResult {
  Table expanded_table;
  std::size_t source_paragraph_index = 0;
  std::string source_sentence;
  /// Column name -> extracted value, label column included.
  std::map<std::string, Value> extracted;
};

/// "<label> has <col> of <v>, <col> of <v> and <col> of <v>." over the
/// non-Empty cells of a row.
std::string verbalize_row(const Table& t, std::size_t row);

/// Removes the row of a uniformly chosen highlighted cell and verbalizes it.
/// Nothing when the table is too small, nothing is highlighted, or the
/// sentence would drop a cell.
std::optional<SplitResult> table_to_text(const Table& t, const ExecResult& exec, Rng& rng, std::size_t min_sub_rows = 1);

/// Reads one new record out of the context paragraphs and appends it.
/// Nothing when no sentence names an unseen row with at least one value.
std::optional<ExpandResult> text_to_table(const Table& t, const Context& ctx);

/// Splits a paragraph into sentences on ". ", "! ", "? " and line breaks.
std::vector<std::string> split_sentences(std::string_view paragraph);

}  // namespace tabsynth
