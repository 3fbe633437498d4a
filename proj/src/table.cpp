#include "tabsynth/table.hpp"

#include "tabsynth/error.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace tabsynth {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(ColumnType t) {
  switch (t) {
    case ColumnType::Numeric: return "numeric";
    case ColumnType::Textual: return "textual";
    case ColumnType::Mixed: return "mixed";
  }
  return "?";
}

std::vector<ColumnType> infer_column_types(const std::vector<std::string>& column_names,
                                           const std::vector<Row>& rows) {
  std::vector<ColumnType> types;
  types.reserve(column_names.size());
  for (std::size_t j = 0; j < column_names.size(); ++j) {
    std::size_t numbers = 0, texts = 0;
    for (const Row& row : rows) {
      if (row[j].is_number()) ++numbers;
      else if (row[j].is_text()) ++texts;
    }
    if (numbers > 0 && texts == 0) types.push_back(ColumnType::Numeric);
    else if (numbers == 0) types.push_back(ColumnType::Textual);
    else types.push_back(ColumnType::Mixed);
  }
  return types;
}

Table::Table(std::string id, std::vector<std::string> column_names, std::vector<Row> rows,
             std::size_t label_col)
    : id_(std::move(id)), rows_(std::move(rows)), label_col_(label_col) {
  if (column_names.empty()) throw MalformedInput("table '" + id_ + "' has zero columns");
  std::set<std::string> seen;
  for (std::size_t j = 0; j < column_names.size(); ++j) {
    std::string name = normalize_space(column_names[j]);
    if (name.empty()) throw MalformedInput("blank column name", 1, j + 1);
    if (!seen.insert(name).second) throw MalformedInput("duplicate header '" + name + "'", 1, j + 1);
    column_names_.push_back(std::move(name));
  }
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (rows_[i].size() != column_names_.size()) {
      throw MalformedInput("ragged row: expected " + std::to_string(column_names_.size()) +
                               " cells, found " + std::to_string(rows_[i].size()),
                           i + 2);
    }
  }
  if (label_col_ >= column_names_.size()) throw MalformedInput("label_col out of range");
  column_types_ = infer_column_types(column_names_, rows_);
}

std::optional<std::size_t> Table::find_column(std::string_view name) const {
  auto it = std::find(column_names_.begin(), column_names_.end(), name);
  if (it == column_names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - column_names_.begin());
}

std::optional<std::size_t> Table::find_row(std::string_view label) const {
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (rows_[i][label_col_].surface() == label) return i;
  }
  std::string lowered = to_lower(label);
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (to_lower(rows_[i][label_col_].surface()) == lowered) return i;
  }
  return std::nullopt;
}

Table Table::with_rows(std::string id, std::vector<Row> rows) const {
  return Table(std::move(id), column_names_, std::move(rows), label_col_);
}

bool Table::structurally_equal(const Table& other) const {
  if (id_ != other.id_ || column_names_ != other.column_names_ || label_col_ != other.label_col_ ||
      rows_.size() != other.rows_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    for (std::size_t j = 0; j < column_names_.size(); ++j) {
      if (!rows_[i][j].identical(other.rows_[i][j])) return false;
    }
  }
  return true;
}

namespace {

struct CsvRecord {
  std::vector<std::string> fields;
  std::size_t line = 0;
};

std::vector<CsvRecord> parse_csv(std::string_view bytes) {
  std::vector<CsvRecord> records;
  std::size_t i = 0, line = 1;
  if (bytes.substr(0, 3) == "\xEF\xBB\xBF") i = 3;
  while (i < bytes.size()) {
    CsvRecord rec;
    rec.line = line;
    std::string field;
    bool record_done = false;
    bool blank = true;
    while (!record_done) {
      if (i < bytes.size() && bytes[i] == '"') {
        blank = false;
        std::size_t open_line = line;
        ++i;
        for (;;) {
          if (i >= bytes.size()) throw MalformedInput("unterminated quoted field", open_line);
          char c = bytes[i++];
          if (c == '"') {
            if (i < bytes.size() && bytes[i] == '"') {
              field.push_back('"');
              ++i;
            } else {
              break;
            }
          } else {
            if (c == '\n') ++line;
            field.push_back(c);
          }
        }
        if (i < bytes.size() && bytes[i] != ',' && bytes[i] != '\n' && bytes[i] != '\r') {
          throw MalformedInput("unexpected character after closing quote", line);
        }
      }
      while (i < bytes.size() && bytes[i] != ',' && bytes[i] != '\n' && bytes[i] != '\r') {
        blank = false;
        field.push_back(bytes[i++]);
      }
      rec.fields.push_back(std::move(field));
      field.clear();
      if (i >= bytes.size()) {
        record_done = true;
      } else if (bytes[i] == ',') {
        blank = false;
        ++i;
      } else {
        if (bytes[i] == '\r') ++i;
        if (i < bytes.size() && bytes[i] == '\n') ++i;
        ++line;
        record_done = true;
      }
    }
    if (!blank) records.push_back(std::move(rec));
  }
  return records;
}

std::string csv_field(const std::string& s) {
  bool quote = s.find_first_of(",\"\r\n") != std::string::npos ||
               (!s.empty() && (std::isspace(static_cast<unsigned char>(s.front())) ||
                               std::isspace(static_cast<unsigned char>(s.back()))));
  if (!quote) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

Table load_csv(std::string_view bytes, std::string id) {
  auto records = parse_csv(bytes);
  if (records.empty()) throw MalformedInput("empty CSV: no header");
  std::vector<std::string> header = records.front().fields;
  std::vector<Row> rows;
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].fields.size() != header.size()) {
      throw MalformedInput("ragged row: expected " + std::to_string(header.size()) + " cells, found " +
                               std::to_string(records[r].fields.size()),
                           records[r].line);
    }
    Row row;
    row.reserve(header.size());
    for (const auto& f : records[r].fields) row.push_back(parse_value(f));
    rows.push_back(std::move(row));
  }
  return Table(std::move(id), std::move(header), std::move(rows));
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Table load_table_json(const json& j, std::string fallback_id) {
  if (!j.is_object()) throw MalformedInput("table JSON must be an object");
  if (!j.contains("header") || !j["header"].is_array()) throw MalformedInput("table JSON lacks a \"header\" array");
  std::vector<std::string> header;
  for (std::size_t k = 0; k < j["header"].size(); ++k) {
    const auto& h = j["header"][k];
    if (!h.is_string()) throw MalformedInput("header entry is not a string", 1, k + 1);
    header.push_back(h.get<std::string>());
  }
  std::vector<Row> rows;
  if (j.contains("rows")) {
    if (!j["rows"].is_array()) throw MalformedInput("\"rows\" is not an array");
    for (std::size_t r = 0; r < j["rows"].size(); ++r) {
      const auto& jr = j["rows"][r];
      if (!jr.is_array()) throw MalformedInput("row is not an array", r + 2);
      if (jr.size() != header.size()) {
        throw MalformedInput("ragged row: expected " + std::to_string(header.size()) + " cells, found " +
                                 std::to_string(jr.size()),
                             r + 2);
      }
      Row row;
      for (std::size_t c = 0; c < jr.size(); ++c) {
        if (!jr[c].is_string()) throw MalformedInput("cell is not a string", r + 2, c + 1);
        row.push_back(parse_value(jr[c].get<std::string>()));
      }
      rows.push_back(std::move(row));
    }
  }
  std::string id = j.contains("id") && j["id"].is_string() ? j["id"].get<std::string>() : std::move(fallback_id);
  std::size_t label_col = 0;
  if (j.contains("label_col")) {
    if (!j["label_col"].is_number_unsigned()) throw MalformedInput("\"label_col\" must be a non-negative integer");
    label_col = j["label_col"].get<std::size_t>();
  }
  return Table(std::move(id), std::move(header), std::move(rows), label_col);
}

Table load_table(std::string_view bytes, TableFormat format, std::string fallback_id) {
  if (format == TableFormat::Csv) return load_csv(bytes, std::move(fallback_id));
  json j;
  try {
    j = json::parse(bytes);
  } catch (const json::parse_error& e) {
    throw MalformedInput(std::string("invalid JSON: ") + e.what(), 0);
  }
  return load_table_json(j, std::move(fallback_id));
}

std::vector<Table> load_table_file(const std::string& path) {
  fs::path p(path);
  std::string bytes = read_file(p);
  std::string stem = p.stem().string();
  std::string ext = to_lower(p.extension().string());
  if (ext == ".csv") return {load_table(bytes, TableFormat::Csv, stem)};
  if (ext != ".json") throw IoError("unsupported table file extension: " + path);
  json j;
  try {
    j = json::parse(bytes);
  } catch (const json::parse_error& e) {
    throw MalformedInput(path + ": invalid JSON: " + e.what());
  }
  std::vector<Table> out;
  if (j.is_array()) {
    for (std::size_t k = 0; k < j.size(); ++k) out.push_back(load_table_json(j[k], stem + "-" + std::to_string(k)));
  } else {
    out.push_back(load_table_json(j, stem));
  }
  return out;
}

std::vector<Table> load_tables(const std::string& path) {
  std::vector<Table> tables;
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(path)) {
      if (!entry.is_regular_file()) continue;
      std::string ext = to_lower(entry.path().extension().string());
      if (ext == ".csv" || ext == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      for (auto& t : load_table_file(f.string())) tables.push_back(std::move(t));
    }
  } else if (fs::exists(path)) {
    tables = load_table_file(path);
  } else {
    throw IoError("no such table path: " + path);
  }
  std::stable_sort(tables.begin(), tables.end(), [](const Table& a, const Table& b) { return a.id() < b.id(); });
  for (std::size_t k = 1; k < tables.size(); ++k) {
    if (tables[k].id() == tables[k - 1].id()) throw MalformedInput("duplicate table id '" + tables[k].id() + "'");
  }
  return tables;
}

json table_to_json(const Table& t) {
  json rows = json::array();
  for (const Row& row : t.rows()) {
    json jr = json::array();
    for (const Value& v : row) jr.push_back(v.surface());
    rows.push_back(std::move(jr));
  }
  json j = json::object();
  j["id"] = t.id();
  j["header"] = t.column_names();
  j["rows"] = std::move(rows);
  if (t.label_col() != 0) j["label_col"] = t.label_col();
  return j;
}

std::string table_to_csv(const Table& t) {
  std::string out;
  auto emit = [&out](const std::vector<std::string>& fields) {
    if (fields.size() == 1 && fields[0].empty()) {
      out += "\"\"\n";  // a bare empty line would read back as no record
      return;
    }
    for (std::size_t k = 0; k < fields.size(); ++k) {
      if (k) out.push_back(',');
      out += csv_field(fields[k]);
    }
    out.push_back('\n');
  };
  emit(t.column_names());
  for (const Row& row : t.rows()) {
    std::vector<std::string> fields;
    for (const Value& v : row) fields.push_back(v.surface());
    emit(fields);
  }
  return out;
}

std::map<std::string, Context> load_contexts(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw MalformedInput(path + ": invalid JSON: " + e.what());
  }
  if (!j.is_object()) throw MalformedInput(path + ": context file must be an object keyed by table id");
  std::map<std::string, Context> out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    Context ctx;
    const json& entry = it.value();
    const json& paras = entry.is_object() && entry.contains("paragraphs") ? entry["paragraphs"] : entry;
    if (!paras.is_array()) throw MalformedInput(path + ": \"paragraphs\" for '" + it.key() + "' is not an array");
    for (const auto& p : paras) {
      if (!p.is_string()) throw MalformedInput(path + ": paragraph is not a string");
      std::string text = p.get<std::string>();
      if (trim(text).empty()) continue;
      ctx.paragraphs.push_back(std::move(text));
    }
    out.emplace(it.key(), std::move(ctx));
  }
  return out;
}

}  // namespace tabsynth
