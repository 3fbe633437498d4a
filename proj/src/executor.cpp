#include "tabsynth/executor.hpp"

#include "tabsynth/error.hpp"

#include <algorithm>
#include <cmath>

namespace tabsynth {

using nlohmann::json;

const char* to_string(ExecErrorKind kind) {
  switch (kind) {
    case ExecErrorKind::TypeError: return "TypeError";
    case ExecErrorKind::MissingColumn: return "MissingColumn";
    case ExecErrorKind::EmptyIntermediate: return "EmptyIntermediate";
    case ExecErrorKind::DivideByZero: return "DivideByZero";
    case ExecErrorKind::UnresolvedCell: return "UnresolvedCell";
    case ExecErrorKind::AmbiguousRow: return "AmbiguousRow";
    case ExecErrorKind::Domain: return "Domain";
    case ExecErrorKind::OpenSlot: return "OpenSlot";
  }
  return "?";
}

const char* to_string(ExecResult::Kind k) {
  switch (k) {
    case ExecResult::Kind::Scalar: return "scalar";
    case ExecResult::Kind::Cells: return "cells";
    case ExecResult::Kind::Bool: return "bool";
    case ExecResult::Kind::EmptySet: return "empty";
  }
  return "?";
}

bool ExecResult::same_value(const ExecResult& other) const {
  if (kind != other.kind) return false;
  switch (kind) {
    case Kind::Scalar: return scalar == other.scalar;
    case Kind::Cells: return cells == other.cells;
    case Kind::Bool: return boolean == other.boolean;
    case Kind::EmptySet: return true;
  }
  return false;
}

bool cell_matches(const Value& cell, const Value& v) { return !cell.is_empty() && cell == v; }

bool claim_equal(const Value& a, const Value& b) {
  if (a.is_number() && b.is_number()) return approx_equal(a.number(), b.number());
  if (a.is_text() && b.is_text()) return a.text_value() == b.text_value();
  return false;
}

namespace {

[[noreturn]] void fail(ExecErrorKind kind, const std::string& what) { throw ExecError(kind, what); }

std::string common_unit(const std::vector<const Value*>& values) {
  if (values.empty()) return {};
  const std::string& unit = values.front()->unit();
  for (const Value* v : values) {
    if (v->unit() != unit) return {};
  }
  return unit;
}

const std::string& concrete(const ColumnSlot& c) {
  if (const auto* name = std::get_if<std::string>(&c)) return *name;
  fail(ExecErrorKind::OpenSlot, "column placeholder c" + std::to_string(std::get<ColumnPlaceholder>(c).index));
}

std::size_t resolve_column(const Table& t, const ColumnSlot& c) {
  const std::string& name = concrete(c);
  auto idx = t.find_column(name);
  if (!idx) fail(ExecErrorKind::MissingColumn, "no column '" + name + "'");
  return *idx;
}

// ---------------------------------------------------------------------------
// SQL

bool sql_condition_holds(const Value& cell, CmpOp op, const Value& v) {
  if (op == CmpOp::Eq) return cell_matches(cell, v);
  int cmp;
  if (cell.is_number() && v.is_number()) {
    auto c = cell.number() <=> v.number();
    cmp = c < 0 ? -1 : c > 0 ? 1 : 0;
  } else if (cell.is_text() && v.is_text()) {
    int c = cell.text_value().compare(v.text_value());
    cmp = c < 0 ? -1 : c > 0 ? 1 : 0;
  } else {
    return false;
  }
  return op == CmpOp::Gt ? cmp > 0 : cmp < 0;
}

// Ascending: Numbers before Text; Empty always sorts last.
bool sql_ascending_less(const Value& a, const Value& b) {
  if (a.is_number() != b.is_number()) return a.is_number();
  if (a.is_number()) return a.number() < b.number();
  return a.text_value() < b.text_value();
}

bool sql_order_less(const Value& a, const Value& b, bool descending) {
  if (a.is_empty() || b.is_empty()) return !a.is_empty() && b.is_empty();
  return descending ? sql_ascending_less(b, a) : sql_ascending_less(a, b);
}

}  // namespace

ExecResult exec_sql(const SqlQuery& q, const Table& t) {
  const std::size_t select_col = resolve_column(t, q.select.column);
  const std::size_t other_col = q.select.kind == SqlSelect::Kind::Diff ? resolve_column(t, q.select.other) : 0;
  std::vector<std::size_t> cond_cols;
  for (const auto& c : q.where) cond_cols.push_back(resolve_column(t, c.column));
  const std::size_t order_col = q.order_by ? resolve_column(t, q.order_by->column) : 0;

  if (q.select.kind == SqlSelect::Kind::Agg && q.select.fn != AggFn::Count &&
      t.column_type(select_col) != ColumnType::Numeric) {
    fail(ExecErrorKind::TypeError, "numeric aggregate over non-numeric column '" + t.column_names()[select_col] + "'");
  }
  if (q.select.kind == SqlSelect::Kind::Diff &&
      (t.column_type(select_col) != ColumnType::Numeric || t.column_type(other_col) != ColumnType::Numeric)) {
    fail(ExecErrorKind::TypeError, "difference over non-numeric columns");
  }

  ExecResult r;
  RowSet rows;
  for (std::size_t i = 0; i < t.num_rows(); ++i) {
    bool keep = true;
    for (std::size_t k = 0; k < q.where.size(); ++k) {
      const auto* operand = std::get_if<Value>(&q.where[k].operand);
      if (!operand) fail(ExecErrorKind::OpenSlot, "condition operand is a placeholder");
      r.highlighted.insert({i, cond_cols[k]});
      keep = keep && sql_condition_holds(t.cell(i, cond_cols[k]), q.where[k].op, *operand);
    }
    if (keep) rows.push_back(i);
  }

  if (q.order_by) {
    for (std::size_t i : rows) r.highlighted.insert({i, order_col});
    const bool desc = q.order_by->descending;
    std::stable_sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
      return sql_order_less(t.cell(a, order_col), t.cell(b, order_col), desc);
    });
  }
  if (q.limit && rows.size() > static_cast<std::size_t>(*q.limit)) rows.resize(static_cast<std::size_t>(*q.limit));

  switch (q.select.kind) {
    case SqlSelect::Kind::Column: {
      for (std::size_t i : rows) {
        const Value& v = t.cell(i, select_col);
        if (v.is_empty()) continue;
        r.highlighted.insert({i, select_col});
        r.cells.push_back(v);
      }
      r.kind = r.cells.empty() ? ExecResult::Kind::EmptySet : ExecResult::Kind::Cells;
      return r;
    }
    case SqlSelect::Kind::Agg: {
      for (std::size_t i : rows) r.highlighted.insert({i, select_col});
      if (q.select.fn == AggFn::Count) {
        r.kind = ExecResult::Kind::Scalar;
        r.scalar = Value::number(Decimal(static_cast<long long>(rows.size())));
        return r;
      }
      std::vector<const Value*> nums;
      for (std::size_t i : rows) {
        if (t.cell(i, select_col).is_number()) nums.push_back(&t.cell(i, select_col));
      }
      if (nums.empty()) {
        r.kind = ExecResult::Kind::EmptySet;
        r.cells.clear();
        return r;
      }
      r.kind = ExecResult::Kind::Scalar;
      if (q.select.fn == AggFn::Sum) {
        Decimal total;
        for (const Value* v : nums) total = total + v->number();
        r.scalar = Value::number(total, common_unit(nums));
      } else {
        const Value* best = nums.front();
        for (const Value* v : nums) {
          if (q.select.fn == AggFn::Max ? v->number() > best->number() : v->number() < best->number()) best = v;
        }
        r.scalar = *best;
      }
      return r;
    }
    case SqlSelect::Kind::Diff: {
      if (rows.empty()) return r;
      if (rows.size() > 1) fail(ExecErrorKind::AmbiguousRow, "difference needs exactly one row, got " + std::to_string(rows.size()));
      const Value& a = t.cell(rows[0], select_col);
      const Value& b = t.cell(rows[0], other_col);
      r.highlighted.insert({rows[0], select_col});
      r.highlighted.insert({rows[0], other_col});
      if (!a.is_number() || !b.is_number()) {
        r.kind = ExecResult::Kind::EmptySet;
        return r;
      }
      r.kind = ExecResult::Kind::Scalar;
      r.scalar = Value::number(a.number() - b.number(), common_unit({&a, &b}));
      return r;
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Logical forms

std::size_t LogicEvaluator::column(const LogicArg& a) const { return resolve_column(table_, std::get<ColumnSlot>(a)); }

const Value& LogicEvaluator::literal(const LogicArg& a) const {
  const auto& slot = std::get<ValueSlot>(a);
  if (const auto* v = std::get_if<Value>(&slot)) return *v;
  fail(ExecErrorKind::OpenSlot, "val" + std::to_string(std::get<ValuePlaceholder>(slot).index) + " is undecided");
}

void LogicEvaluator::require_numeric(std::size_t col, std::string_view op) const {
  if (table_.column_type(col) != ColumnType::Numeric) {
    fail(ExecErrorKind::TypeError, std::string(op) + " over non-numeric column '" + table_.column_names()[col] + "'");
  }
}

void LogicEvaluator::highlight_column(const RowSet& rows, std::size_t col) {
  for (std::size_t r : rows) highlighted_.insert({r, col});
}

RowSet LogicEvaluator::eval_rows(const LogicArg& a) {
  if (std::holds_alternative<AllRows>(a)) {
    RowSet all(table_.num_rows());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return all;
  }
  auto result = eval(*std::get<Box<LogicNode>>(a));
  if (auto* rows = std::get_if<RowSet>(&result)) return std::move(*rows);
  fail(ExecErrorKind::TypeError, "expected a row set");
}

Value LogicEvaluator::eval_scalar(const LogicArg& a) {
  if (const auto* box = std::get_if<Box<LogicNode>>(&a)) {
    auto result = eval(**box);
    if (auto* v = std::get_if<Value>(&result)) return std::move(*v);
    fail(ExecErrorKind::TypeError, "expected a scalar");
  }
  return literal(a);
}

bool LogicEvaluator::eval_bool(const LogicNode& n) {
  auto result = eval(n);
  if (auto* b = std::get_if<bool>(&result)) return *b;
  fail(ExecErrorKind::TypeError, "expected a boolean");
}

LogicEvaluator::Result LogicEvaluator::eval(const LogicNode& n) {
  const std::string_view name = signature(n.op).name;
  switch (n.op) {
    case LogicOp::Eq:
    case LogicOp::NotEq:
    case LogicOp::Greater:
    case LogicOp::Less: {
      Value a = eval_scalar(n.args[0]);
      Value b = eval_scalar(n.args[1]);
      if (n.op == LogicOp::Eq) return claim_equal(a, b);
      if (n.op == LogicOp::NotEq) return !claim_equal(a, b);
      if (!a.is_number() || !b.is_number()) fail(ExecErrorKind::TypeError, std::string(name) + " compares numbers only");
      if (approx_equal(a.number(), b.number())) return false;
      return n.op == LogicOp::Greater ? a.number() > b.number() : a.number() < b.number();
    }
    case LogicOp::And: {
      bool a = eval_bool(*std::get<Box<LogicNode>>(n.args[0]));
      bool b = eval_bool(*std::get<Box<LogicNode>>(n.args[1]));
      return a && b;
    }
    case LogicOp::Count: return Value::number(Decimal(static_cast<long long>(eval_rows(n.args[0]).size())));
    case LogicOp::Hop: {
      RowSet rows = eval_rows(n.args[0]);
      std::size_t col = column(n.args[1]);
      if (rows.empty()) fail(ExecErrorKind::EmptyIntermediate, "hop over an empty row set");
      if (rows.size() > 1) multi_row_hop_ = true;
      highlighted_.insert({rows[0], col});
      const Value& v = table_.cell(rows[0], col);
      if (v.is_empty()) fail(ExecErrorKind::EmptyIntermediate, "hop reached an empty cell");
      return v;
    }
    case LogicOp::FilterEq:
    case LogicOp::FilterNotEq:
    case LogicOp::FilterGreater:
    case LogicOp::FilterLess: {
      RowSet rows = eval_rows(n.args[0]);
      std::size_t col = column(n.args[1]);
      const Value& v = literal(n.args[2]);
      const bool ordered = n.op == LogicOp::FilterGreater || n.op == LogicOp::FilterLess;
      if (ordered && !v.is_number()) fail(ExecErrorKind::TypeError, std::string(name) + " needs a numeric operand");
      highlight_column(rows, col);
      RowSet out;
      for (std::size_t r : rows) {
        const Value& cell = table_.cell(r, col);
        bool keep = false;
        switch (n.op) {
          case LogicOp::FilterEq: keep = cell_matches(cell, v); break;
          case LogicOp::FilterNotEq: keep = !cell.is_empty() && !cell_matches(cell, v); break;
          case LogicOp::FilterGreater: keep = cell.is_number() && cell.number() > v.number(); break;
          default: keep = cell.is_number() && cell.number() < v.number(); break;
        }
        if (keep) out.push_back(r);
      }
      return out;
    }
    case LogicOp::FilterAll: {
      RowSet rows = eval_rows(n.args[0]);
      column(n.args[1]);
      return rows;
    }
    case LogicOp::Argmax:
    case LogicOp::Argmin:
    case LogicOp::Max:
    case LogicOp::Min: {
      RowSet rows = eval_rows(n.args[0]);
      std::size_t col = column(n.args[1]);
      require_numeric(col, name);
      highlight_column(rows, col);
      const bool want_max = n.op == LogicOp::Argmax || n.op == LogicOp::Max;
      std::optional<std::size_t> best;
      for (std::size_t r : rows) {
        const Value& v = table_.cell(r, col);
        if (!v.is_number()) continue;
        if (!best) {
          best = r;
          continue;
        }
        const Decimal& b = table_.cell(*best, col).number();
        bool better = want_max ? v.number() > b : v.number() < b;
        bool tie_lower = v.number() == b && r < *best;
        if (better || tie_lower) best = r;
      }
      if (!best) fail(ExecErrorKind::EmptyIntermediate, std::string(name) + " found no numbers");
      if (n.op == LogicOp::Argmax || n.op == LogicOp::Argmin) return RowSet{*best};
      return table_.cell(*best, col);
    }
    case LogicOp::Sum:
    case LogicOp::Avg: {
      RowSet rows = eval_rows(n.args[0]);
      std::size_t col = column(n.args[1]);
      require_numeric(col, name);
      highlight_column(rows, col);
      std::vector<const Value*> nums;
      for (std::size_t r : rows) {
        if (table_.cell(r, col).is_number()) nums.push_back(&table_.cell(r, col));
      }
      if (nums.empty()) fail(ExecErrorKind::EmptyIntermediate, std::string(name) + " found no numbers");
      Decimal total;
      for (const Value* v : nums) total = total + v->number();
      if (n.op == LogicOp::Avg) total = total / Decimal(static_cast<long long>(nums.size()));
      return Value::number(total, common_unit(nums));
    }
    case LogicOp::MostEq:
    case LogicOp::AllEq:
    case LogicOp::Unique: {
      RowSet rows = eval_rows(n.args[0]);
      std::size_t col = column(n.args[1]);
      const Value& v = literal(n.args[2]);
      highlight_column(rows, col);
      if (rows.empty()) fail(ExecErrorKind::EmptyIntermediate, std::string(name) + " over an empty row set");
      std::size_t matches = 0;
      for (std::size_t r : rows) {
        if (cell_matches(table_.cell(r, col), v)) ++matches;
      }
      if (n.op == LogicOp::MostEq) return 2 * matches > rows.size();
      if (n.op == LogicOp::AllEq) return matches == rows.size();
      return matches == 1;
    }
    case LogicOp::NthMax:
    case LogicOp::NthMin:
    case LogicOp::NthArgmax:
    case LogicOp::NthArgmin: {
      RowSet rows = eval_rows(n.args[0]);
      std::size_t col = column(n.args[1]);
      const Value& ordinal = literal(n.args[2]);
      require_numeric(col, name);
      if (!ordinal.is_number() || !ordinal.number().is_integer() || ordinal.number() < Decimal(1)) {
        fail(ExecErrorKind::TypeError, std::string(name) + " needs a positive integer rank");
      }
      highlight_column(rows, col);
      std::vector<std::size_t> ranked;
      for (std::size_t r : rows) {
        if (table_.cell(r, col).is_number()) ranked.push_back(r);
      }
      const bool descending = n.op == LogicOp::NthMax || n.op == LogicOp::NthArgmax;
      std::sort(ranked.begin(), ranked.end(), [&](std::size_t a, std::size_t b) {
        const Decimal& va = table_.cell(a, col).number();
        const Decimal& vb = table_.cell(b, col).number();
        if (va != vb) return descending ? va > vb : va < vb;
        return a < b;
      });
      const Decimal::Rational& rank = ordinal.number().rational();
      if (rank > static_cast<long long>(ranked.size())) {
        fail(ExecErrorKind::EmptyIntermediate, std::string(name) + " rank exceeds the number of values");
      }
      std::size_t row = ranked[static_cast<std::size_t>(boost::multiprecision::numerator(rank)) - 1];
      if (n.op == LogicOp::NthArgmax || n.op == LogicOp::NthArgmin) return RowSet{row};
      return table_.cell(row, col);
    }
  }
  fail(ExecErrorKind::TypeError, "unknown operator");
}

ExecResult exec_logic(const LogicNode& root, const Table& t) {
  LogicEvaluator ev(t);
  ExecResult r;
  r.boolean = ev.eval_bool(root);
  r.kind = ExecResult::Kind::Bool;
  r.highlighted = ev.highlighted();
  r.multi_row_hop = ev.multi_row_hop();
  return r;
}

// ---------------------------------------------------------------------------
// Arithmetic

namespace {

constexpr long long kMaxExactExponent = 64;

Decimal power(const Decimal& base, const Decimal& exponent) {
  if (exponent.is_integer() && exponent.abs() <= Decimal(kMaxExactExponent)) {
    if (base.is_zero() && exponent.is_negative()) fail(ExecErrorKind::DivideByZero, "zero raised to a negative power");
    long long n = static_cast<long long>(boost::multiprecision::numerator(exponent.abs().rational()));
    Decimal result(1);
    for (long long k = 0; k < n; ++k) result = result * base;
    return exponent.is_negative() ? Decimal(1) / result : result;
  }
  if (base.is_zero() && exponent.is_negative()) fail(ExecErrorKind::DivideByZero, "zero raised to a negative power");
  if (base.is_negative()) fail(ExecErrorKind::Domain, "negative base with a non-integer exponent");
  auto d = Decimal::from_double(std::pow(base.to_double(), exponent.to_double()));
  if (!d) fail(ExecErrorKind::Domain, "power overflow");
  return *d;
}

}  // namespace

ExecResult exec_arith(const ArithExpr& e, const Table& t) {
  ExecResult r;
  std::vector<Decimal> results;
  for (std::size_t s = 0; s < e.steps.size(); ++s) {
    const ArithStep& step = e.steps[s];
    if (is_table_op(step.op)) {
      const auto* slot = std::get_if<ColumnSlot>(&step.args.at(0));
      if (!slot) fail(ExecErrorKind::TypeError, "table operations take a column");
      std::size_t col = resolve_column(t, *slot);
      if (t.column_type(col) != ColumnType::Numeric) {
        fail(ExecErrorKind::TypeError, std::string(to_string(step.op)) + " over non-numeric column");
      }
      std::vector<Decimal> nums;
      for (std::size_t i = 0; i < t.num_rows(); ++i) {
        r.highlighted.insert({i, col});
        if (t.cell(i, col).is_number()) nums.push_back(t.cell(i, col).number());
      }
      if (nums.empty()) fail(ExecErrorKind::EmptyIntermediate, "column has no numbers");
      Decimal acc = nums.front();
      for (std::size_t k = 1; k < nums.size(); ++k) {
        switch (step.op) {
          case ArithOp::TableMax: acc = std::max(acc, nums[k]); break;
          case ArithOp::TableMin: acc = std::min(acc, nums[k]); break;
          default: acc = acc + nums[k]; break;
        }
      }
      if (step.op == ArithOp::TableAverage) acc = acc / Decimal(static_cast<long long>(nums.size()));
      results.push_back(acc);
      continue;
    }

    Decimal operand[2];
    for (std::size_t k = 0; k < 2; ++k) {
      const ArithOperand& a = step.args.at(k);
      if (const auto* lit = std::get_if<Value>(&a)) {
        if (!lit->is_number()) fail(ExecErrorKind::TypeError, "arithmetic on a non-number literal");
        operand[k] = lit->number();
      } else if (const auto* cell = std::get_if<CellSel>(&a)) {
        auto col = t.find_column(cell->column);
        if (!col) fail(ExecErrorKind::UnresolvedCell, "no column '" + cell->column + "'");
        auto row = t.find_row(cell->row);
        if (!row) fail(ExecErrorKind::UnresolvedCell, "no row labelled '" + cell->row + "'");
        r.highlighted.insert({*row, *col});
        r.highlighted.insert({*row, t.label_col()});  // the row name is read too
        const Value& v = t.cell(*row, *col);
        if (!v.is_number()) fail(ExecErrorKind::TypeError, "cell '" + cell->column + " of " + cell->row + "' is not a number");
        operand[k] = v.number();
      } else if (const auto* ref = std::get_if<StepRef>(&a)) {
        if (ref->index >= s) fail(ExecErrorKind::UnresolvedCell, "#" + std::to_string(ref->index) + " is not an earlier step");
        operand[k] = results[ref->index];
      } else if (std::holds_alternative<ValuePlaceholder>(a)) {
        fail(ExecErrorKind::OpenSlot, "cell placeholder");
      } else {
        fail(ExecErrorKind::TypeError, "a column is not a number");
      }
    }
    switch (step.op) {
      case ArithOp::Add: results.push_back(operand[0] + operand[1]); break;
      case ArithOp::Subtract: results.push_back(operand[0] - operand[1]); break;
      case ArithOp::Multiply: results.push_back(operand[0] * operand[1]); break;
      case ArithOp::Divide:
        if (operand[1].is_zero()) fail(ExecErrorKind::DivideByZero, "division by zero");
        results.push_back(operand[0] / operand[1]);
        break;
      case ArithOp::Greater: results.push_back(Decimal(operand[0] > operand[1] ? 1 : 0)); break;
      case ArithOp::Exp: results.push_back(power(operand[0], operand[1])); break;
      default: fail(ExecErrorKind::TypeError, "unexpected operation");
    }
  }
  if (results.empty()) fail(ExecErrorKind::TypeError, "empty expression");
  r.kind = ExecResult::Kind::Scalar;
  r.scalar = Value::number(results.back());
  return r;
}

ExecResult execute(const Program& p, const Table& t) {
  switch (p.family) {
    case Family::Sql: return exec_sql(p.sql(), t);
    case Family::Logic: return exec_logic(p.logic(), t);
    case Family::Arith: return exec_arith(p.arith(), t);
  }
  fail(ExecErrorKind::TypeError, "unknown family");
}

json answer_to_json(const ExecResult& r) {
  switch (r.kind) {
    case ExecResult::Kind::Scalar: return r.scalar.surface();
    case ExecResult::Kind::Cells: {
      json arr = json::array();
      for (const Value& v : r.cells) arr.push_back(v.surface());
      return arr;
    }
    case ExecResult::Kind::Bool: return r.boolean;
    case ExecResult::Kind::EmptySet: return nullptr;
  }
  return nullptr;
}

json exec_result_to_json(const ExecResult& r) {
  json cells = json::array();
  for (const CellRef& c : r.highlighted) cells.push_back({c.row, c.col});
  json j = json::object();
  j["kind"] = to_string(r.kind);
  j["value"] = answer_to_json(r);
  j["highlighted"] = std::move(cells);
  if (r.multi_row_hop) j["multi_row_hop"] = true;
  return j;
}

}  // namespace tabsynth
