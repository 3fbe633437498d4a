#include "tabsynth/program.hpp"

#include "program_internal.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <sstream>

namespace tabsynth {

const char* to_string(Family f) {
  switch (f) {
    case Family::Sql: return "sql";
    case Family::Logic: return "logic";
    case Family::Arith: return "arith";
  }
  return "?";
}

std::optional<Family> family_from_string(std::string_view s) {
  if (s == "sql") return Family::Sql;
  if (s == "logic") return Family::Logic;
  if (s == "arith") return Family::Arith;
  return std::nullopt;
}

const std::vector<OpSignature>& logic_ops() {
  using A = ArgKind;
  using R = ResultKind;
  static const std::vector<OpSignature> ops = {
      {LogicOp::Eq, "eq", {A::Scalar, A::Scalar}, R::Bool},
      {LogicOp::NotEq, "not_eq", {A::Scalar, A::Scalar}, R::Bool},
      {LogicOp::Greater, "greater", {A::Scalar, A::Scalar}, R::Bool},
      {LogicOp::Less, "less", {A::Scalar, A::Scalar}, R::Bool},
      {LogicOp::Hop, "hop", {A::Rows, A::Column}, R::Scalar},
      {LogicOp::Count, "count", {A::Rows}, R::Scalar},
      {LogicOp::FilterEq, "filter_eq", {A::Rows, A::Column, A::Value}, R::Rows},
      {LogicOp::FilterNotEq, "filter_not_eq", {A::Rows, A::Column, A::Value}, R::Rows},
      {LogicOp::FilterGreater, "filter_greater", {A::Rows, A::Column, A::Value}, R::Rows},
      {LogicOp::FilterLess, "filter_less", {A::Rows, A::Column, A::Value}, R::Rows},
      {LogicOp::FilterAll, "filter_all", {A::Rows, A::Column}, R::Rows},
      {LogicOp::Argmax, "argmax", {A::Rows, A::Column}, R::Rows, true},
      {LogicOp::Argmin, "argmin", {A::Rows, A::Column}, R::Rows, true},
      {LogicOp::Max, "max", {A::Rows, A::Column}, R::Scalar, true},
      {LogicOp::Min, "min", {A::Rows, A::Column}, R::Scalar, true},
      {LogicOp::Sum, "sum", {A::Rows, A::Column}, R::Scalar, true},
      {LogicOp::Avg, "avg", {A::Rows, A::Column}, R::Scalar, true},
      {LogicOp::MostEq, "most_eq", {A::Rows, A::Column, A::Value}, R::Bool},
      {LogicOp::AllEq, "all_eq", {A::Rows, A::Column, A::Value}, R::Bool},
      {LogicOp::Unique, "unique", {A::Rows, A::Column, A::Value}, R::Bool},
      {LogicOp::NthMax, "nth_max", {A::Rows, A::Column, A::Ordinal}, R::Scalar, true},
      {LogicOp::NthMin, "nth_min", {A::Rows, A::Column, A::Ordinal}, R::Scalar, true},
      {LogicOp::NthArgmax, "nth_argmax", {A::Rows, A::Column, A::Ordinal}, R::Rows, true},
      {LogicOp::NthArgmin, "nth_argmin", {A::Rows, A::Column, A::Ordinal}, R::Rows, true},
      {LogicOp::And, "and", {A::Bool, A::Bool}, R::Bool},
  };
  return ops;
}

const OpSignature& signature(LogicOp op) {
  for (const auto& s : logic_ops()) {
    if (s.op == op) return s;
  }
  return logic_ops().front();
}

const OpSignature* find_logic_op(std::string_view name) {
  for (const auto& s : logic_ops()) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

bool is_comparison(LogicOp op) {
  return op == LogicOp::Eq || op == LogicOp::NotEq || op == LogicOp::Greater || op == LogicOp::Less;
}

const char* to_string(ArithOp op) {
  switch (op) {
    case ArithOp::Add: return "add";
    case ArithOp::Subtract: return "subtract";
    case ArithOp::Multiply: return "multiply";
    case ArithOp::Divide: return "divide";
    case ArithOp::Greater: return "greater";
    case ArithOp::Exp: return "exp";
    case ArithOp::TableMax: return "table_max";
    case ArithOp::TableMin: return "table_min";
    case ArithOp::TableSum: return "table_sum";
    case ArithOp::TableAverage: return "table_average";
  }
  return "?";
}

bool is_table_op(ArithOp op) {
  return op == ArithOp::TableMax || op == ArithOp::TableMin || op == ArithOp::TableSum || op == ArithOp::TableAverage;
}

namespace detail {

std::optional<ColumnPlaceholder> match_column_placeholder(std::string_view word) {
  if (word.size() < 2 || word[0] != 'c') return std::nullopt;
  std::size_t i = 1;
  int index = 0;
  while (i < word.size() && std::isdigit(static_cast<unsigned char>(word[i]))) {
    if (index > 100000) return std::nullopt;
    index = index * 10 + (word[i] - '0');
    ++i;
  }
  if (i == 1) return std::nullopt;
  std::string_view rest = word.substr(i);
  if (rest.empty()) return ColumnPlaceholder{index, SlotType::Any};
  if (rest == "_number") return ColumnPlaceholder{index, SlotType::Number};
  return std::nullopt;
}

std::optional<int> match_value_placeholder(std::string_view word) {
  if (word.size() < 4 || word.substr(0, 3) != "val") return std::nullopt;
  int index = 0;
  for (std::size_t i = 3; i < word.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(word[i])) || index > 100000) return std::nullopt;
    index = index * 10 + (word[i] - '0');
  }
  return index;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Placeholder scan

namespace {

bool slot_has_placeholder(const ColumnSlot& s) { return std::holds_alternative<ColumnPlaceholder>(s); }
bool slot_has_placeholder(const ValueSlot& s) { return std::holds_alternative<ValuePlaceholder>(s); }

bool has_placeholder(const LogicNode& n) {
  for (const auto& a : n.args) {
    if (const auto* c = std::get_if<ColumnSlot>(&a); c && slot_has_placeholder(*c)) return true;
    if (const auto* v = std::get_if<ValueSlot>(&a); v && slot_has_placeholder(*v)) return true;
    if (const auto* b = std::get_if<Box<LogicNode>>(&a); b && has_placeholder(**b)) return true;
  }
  return false;
}

}  // namespace

bool Program::has_placeholders() const {
  if (const auto* q = std::get_if<SqlQuery>(&ast)) {
    if (slot_has_placeholder(q->select.column)) return true;
    if (q->select.kind == SqlSelect::Kind::Diff && slot_has_placeholder(q->select.other)) return true;
    for (const auto& c : q->where) {
      if (slot_has_placeholder(c.column) || slot_has_placeholder(c.operand)) return true;
    }
    return q->order_by && slot_has_placeholder(q->order_by->column);
  }
  if (const auto* n = std::get_if<LogicNode>(&ast)) return has_placeholder(*n);
  for (const auto& step : arith().steps) {
    for (const auto& a : step.args) {
      if (std::holds_alternative<ValuePlaceholder>(a)) return true;
      if (const auto* c = std::get_if<ColumnSlot>(&a); c && slot_has_placeholder(*c)) return true;
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// Printing

namespace {

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || static_cast<unsigned char>(c) >= 0x80;
}
bool is_ident_char(char c) { return is_ident_start(c) || std::isdigit(static_cast<unsigned char>(c)); }

bool is_plain_identifier(std::string_view s) {
  if (s.empty() || !is_ident_start(s[0])) return false;
  return std::all_of(s.begin(), s.end(), is_ident_char);
}

bool looks_like_placeholder(std::string_view s) {
  return detail::match_column_placeholder(s) || detail::match_value_placeholder(s);
}

std::string backtick(std::string_view s) {
  std::string out = "`";
  for (char c : s) {
    if (c == '`') out.push_back('`');
    out.push_back(c);
  }
  out.push_back('`');
  return out;
}

std::string single_quote(std::string_view s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out.push_back('\'');
    out.push_back(c);
  }
  out.push_back('\'');
  return out;
}

constexpr std::array<std::string_view, 14> kSqlReserved = {
    "select", "from", "where", "and", "order", "by", "asc", "desc", "limit", "count", "max", "min", "sum", "w"};

std::string sql_name(std::string_view s) {
  std::string lower = to_lower(s);
  bool reserved = std::find(kSqlReserved.begin(), kSqlReserved.end(), lower) != kSqlReserved.end();
  if (is_plain_identifier(s) && !reserved && !looks_like_placeholder(s)) return std::string(s);
  return backtick(s);
}

std::string logic_name(std::string_view s) {
  bool plain = !s.empty() && s.find_first_of(";{}'`") == std::string_view::npos && normalize_space(s) == s &&
               s != "all_rows" && !looks_like_placeholder(s);
  return plain ? std::string(s) : backtick(s);
}

std::string arith_name(std::string_view s) {
  std::string lower = to_lower(s);
  bool plain = is_plain_identifier(s) && lower != "of" && lower != "none" && !looks_like_placeholder(s);
  return plain ? std::string(s) : backtick(s);
}

std::string column_text(const ColumnSlot& c, std::string (*quote)(std::string_view)) {
  if (const auto* name = std::get_if<std::string>(&c)) return quote(*name);
  const auto& ph = std::get<ColumnPlaceholder>(c);
  return "c" + std::to_string(ph.index) + (ph.type == SlotType::Number ? "_number" : "");
}

std::string literal_text(const Value& v) {
  if (v.is_number()) return v.number().to_string();
  return single_quote(v.surface());
}

std::string value_text(const ValueSlot& v) {
  if (const auto* lit = std::get_if<Value>(&v)) return literal_text(*lit);
  return "val" + std::to_string(std::get<ValuePlaceholder>(v).index);
}

const char* agg_name(AggFn fn) {
  switch (fn) {
    case AggFn::Count: return "count";
    case AggFn::Max: return "max";
    case AggFn::Min: return "min";
    case AggFn::Sum: return "sum";
  }
  return "?";
}

std::string print_sql(const SqlQuery& q) {
  std::ostringstream out;
  out << "select ";
  switch (q.select.kind) {
    case SqlSelect::Kind::Column: out << column_text(q.select.column, sql_name); break;
    case SqlSelect::Kind::Agg:
      out << agg_name(q.select.fn) << '(' << column_text(q.select.column, sql_name) << ')';
      break;
    case SqlSelect::Kind::Diff:
      out << column_text(q.select.column, sql_name) << " - " << column_text(q.select.other, sql_name);
      break;
  }
  out << " from w";
  for (std::size_t k = 0; k < q.where.size(); ++k) {
    const auto& c = q.where[k];
    out << (k == 0 ? " where " : " and ") << column_text(c.column, sql_name) << ' '
        << (c.op == CmpOp::Eq ? '=' : c.op == CmpOp::Gt ? '>' : '<') << ' ' << value_text(c.operand);
  }
  if (q.order_by) {
    out << " order by " << column_text(q.order_by->column, sql_name) << (q.order_by->descending ? " desc" : " asc");
  }
  if (q.limit) out << " limit " << *q.limit;
  return out.str();
}

void print_logic(const LogicNode& n, std::string& out) {
  out += signature(n.op).name;
  out += " { ";
  for (std::size_t k = 0; k < n.args.size(); ++k) {
    if (k) out += " ; ";
    const auto& a = n.args[k];
    if (std::holds_alternative<AllRows>(a)) out += "all_rows";
    else if (const auto* c = std::get_if<ColumnSlot>(&a)) out += column_text(*c, logic_name);
    else if (const auto* v = std::get_if<ValueSlot>(&a)) out += value_text(*v);
    else print_logic(*std::get<Box<LogicNode>>(a), out);
  }
  out += " }";
}

std::string print_arith(const ArithExpr& e) {
  std::string out;
  for (std::size_t s = 0; s < e.steps.size(); ++s) {
    if (s) out += ", ";
    const auto& step = e.steps[s];
    out += to_string(step.op);
    out += '(';
    for (std::size_t k = 0; k < step.args.size(); ++k) {
      if (k) out += ", ";
      const auto& a = step.args[k];
      if (const auto* lit = std::get_if<Value>(&a)) out += literal_text(*lit);
      else if (const auto* cell = std::get_if<CellSel>(&a)) out += arith_name(cell->column) + " of " + arith_name(cell->row);
      else if (const auto* ph = std::get_if<ValuePlaceholder>(&a)) out += "val" + std::to_string(ph->index);
      else if (const auto* col = std::get_if<ColumnSlot>(&a)) out += column_text(*col, arith_name);
      else out += "#" + std::to_string(std::get<StepRef>(a).index);
    }
    out += ')';
  }
  return out;
}

void add_unique(std::vector<std::string>& out, const std::string& s) {
  if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
}

void add_column(std::vector<std::string>& out, const ColumnSlot& c) {
  if (const auto* name = std::get_if<std::string>(&c)) add_unique(out, *name);
}

void logic_columns(const LogicNode& n, std::vector<std::string>& out) {
  for (const auto& a : n.args) {
    if (const auto* c = std::get_if<ColumnSlot>(&a)) add_column(out, *c);
    else if (const auto* b = std::get_if<Box<LogicNode>>(&a)) logic_columns(**b, out);
  }
}

}  // namespace

std::string print_program(const Program& p) {
  switch (p.family) {
    case Family::Sql: return print_sql(p.sql());
    case Family::Logic: {
      std::string out;
      print_logic(p.logic(), out);
      return out;
    }
    case Family::Arith: return print_arith(p.arith());
  }
  return {};
}

std::vector<std::string> referenced_columns(const Program& p) {
  std::vector<std::string> out;
  if (p.family == Family::Sql) {
    const auto& q = p.sql();
    add_column(out, q.select.column);
    if (q.select.kind == SqlSelect::Kind::Diff) add_column(out, q.select.other);
    for (const auto& c : q.where) add_column(out, c.column);
    if (q.order_by) add_column(out, q.order_by->column);
  } else if (p.family == Family::Logic) {
    logic_columns(p.logic(), out);
  } else {
    for (const auto& step : p.arith().steps) {
      for (const auto& a : step.args) {
        if (const auto* cell = std::get_if<CellSel>(&a)) add_unique(out, cell->column);
        else if (const auto* col = std::get_if<ColumnSlot>(&a)) add_column(out, *col);
      }
    }
  }
  return out;
}

}  // namespace tabsynth
