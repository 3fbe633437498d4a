#pragma once

#include "tabsynth/value.hpp"

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace tabsynth {

enum class ColumnType { Numeric, Textual, Mixed };

const char* to_string(ColumnType t);

struct CellRef {
  std::size_t row = 0;
  std::size_t col = 0;

  friend auto operator<=>(const CellRef&, const CellRef&) = default;
};

using Row = std::vector<Value>;

/// Immutable rectangular table of typed cells.
///
/// Column types are derived once at construction. One column (0 unless the
/// input says otherwise) holds row labels used for `col of row` addressing
/// and row verbalization.
class Table {
 public:
  /// Throws MalformedInput when the header is empty, names collide after
  /// whitespace normalization, a row is ragged, or label_col is out of range.
  Table(std::string id, std::vector<std::string> column_names, std::vector<Row> rows,
        std::size_t label_col = 0);

  const std::string& id() const { return id_; }
  const std::vector<std::string>& column_names() const { return column_names_; }
  const std::vector<Row>& rows() const { return rows_; }
  const std::vector<ColumnType>& column_types() const { return column_types_; }
  std::size_t label_col() const { return label_col_; }

  std::size_t num_rows() const { return rows_.size(); }
  std::size_t num_cols() const { return column_names_.size(); }

  const Value& cell(std::size_t row, std::size_t col) const { return rows_.at(row).at(col); }
  const Value& cell(CellRef ref) const { return cell(ref.row, ref.col); }
  ColumnType column_type(std::size_t col) const { return column_types_.at(col); }

  std::optional<std::size_t> find_column(std::string_view name) const;
  /// Row whose label cell reads `label`: exact surface match first, then
  /// case-insensitive. First match wins.
  std::optional<std::size_t> find_row(std::string_view label) const;

  /// Copy with a different id and rows; names and label column kept.
  Table with_rows(std::string id, std::vector<Row> rows) const;

  /// Same id, names, label column, and cell-by-cell identical values.
  bool structurally_equal(const Table& other) const;

 private:
  std::string id_;
  std::vector<std::string> column_names_;
  std::vector<Row> rows_;
  std::vector<ColumnType> column_types_;
  std::size_t label_col_ = 0;
};

/// Numeric iff every non-Empty cell is a Number; Textual iff none is; a
/// column with no non-Empty cells is Textual.
std::vector<ColumnType> infer_column_types(const std::vector<std::string>& column_names,
                                           const std::vector<Row>& rows);

enum class TableFormat { Csv, Json };

/// RFC-4180 CSV (first record is the header) or the JSON object form
/// {"id", "header", "rows", "label_col"}. `fallback_id` names CSV tables and
/// JSON tables without an "id".
Table load_table(std::string_view bytes, TableFormat format, std::string fallback_id = "table");
Table load_table_json(const nlohmann::json& j, std::string fallback_id = "table");
/// Loads a single .csv/.json file; a .json file may hold one table or an array.
std::vector<Table> load_table_file(const std::string& path);
/// Loads every .csv/.json file under `path` (or `path` itself), sorted by id.
std::vector<Table> load_tables(const std::string& path);

nlohmann::json table_to_json(const Table& t);
std::string table_to_csv(const Table& t);

/// Surrounding paragraphs of one table.
struct Context {
  std::vector<std::string> paragraphs;
};

/// Sidecar JSON object keyed by table id: {"<id>": {"paragraphs": [...]}}.
std::map<std::string, Context> load_contexts(const std::string& path);

}  // namespace tabsynth
