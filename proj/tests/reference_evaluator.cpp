#include "reference_evaluator.hpp"

#include <cmath>
#include <sstream>

namespace oracle {

using namespace tabsynth;
using Kind = ExecResult::Kind;

namespace {

struct Fail {
  ExecErrorKind kind;
};

[[noreturn]] void fail(ExecErrorKind k) { throw Fail{k}; }

std::size_t col_index(const Table& t, const ColumnSlot& c) {
  const auto* name = std::get_if<std::string>(&c);
  if (!name) fail(ExecErrorKind::OpenSlot);
  for (std::size_t i = 0; i < t.num_cols(); ++i) {
    if (t.column_names()[i] == *name) return i;
  }
  fail(ExecErrorKind::MissingColumn);
}

bool all_numeric(const Table& t, std::size_t c) {
  bool any = false;
  for (std::size_t r = 0; r < t.num_rows(); ++r) {
    const Value& v = t.cell(r, c);
    if (v.is_text()) return false;
    any = any || v.is_number();
  }
  return any;
}

std::string unit_of(const std::vector<Value>& nums) {
  if (nums.empty()) return "";
  for (const Value& v : nums) {
    if (v.unit() != nums[0].unit()) return "";
  }
  return nums[0].unit();
}

bool within_tolerance(const Decimal& a, const Decimal& b) {
  Decimal diff = (a - b).abs();
  Decimal scale = a.abs() > b.abs() ? a.abs() : b.abs();
  return diff * Decimal(1'000'000'000) <= scale;
}

bool claim_eq(const Value& a, const Value& b) {
  if (a.is_number() && b.is_number()) return within_tolerance(a.number(), b.number());
  if (a.is_text() && b.is_text()) return a.text_value() == b.text_value();
  return false;
}

bool same_cell(const Value& cell, const Value& lit) {
  if (cell.is_empty() || lit.is_empty()) return false;
  if (cell.is_number() && lit.is_number()) return cell.number() == lit.number();
  if (cell.is_text() && lit.is_text()) return cell.text_value() == lit.text_value();
  return false;
}

// ---------------------------------------------------------------------------
// SQL

// -1, 0, 1 comparing two non-Empty order keys ascending.
int asc_cmp(const Value& a, const Value& b) {
  if (a.is_number() && b.is_text()) return -1;
  if (a.is_text() && b.is_number()) return 1;
  if (a.is_number()) return a.number() < b.number() ? -1 : (b.number() < a.number() ? 1 : 0);
  return a.text_value() < b.text_value() ? -1 : (b.text_value() < a.text_value() ? 1 : 0);
}

// True when row key `a` must come strictly before `b`.
bool before(const Value& a, const Value& b, bool desc) {
  if (a.is_empty()) return false;
  if (b.is_empty()) return true;
  int c = asc_cmp(a, b);
  return desc ? c > 0 : c < 0;
}

Outcome sql(const SqlQuery& q, const Table& t) {
  Outcome o;
  std::size_t sel = col_index(t, q.select.column);
  std::size_t other = q.select.kind == SqlSelect::Kind::Diff ? col_index(t, q.select.other) : 0;
  std::vector<std::size_t> conds;
  for (const auto& c : q.where) conds.push_back(col_index(t, c.column));
  std::size_t ord = q.order_by ? col_index(t, q.order_by->column) : 0;

  bool numeric_needed = (q.select.kind == SqlSelect::Kind::Agg && q.select.fn != AggFn::Count);
  if (numeric_needed && !all_numeric(t, sel)) fail(ExecErrorKind::TypeError);
  if (q.select.kind == SqlSelect::Kind::Diff && (!all_numeric(t, sel) || !all_numeric(t, other))) fail(ExecErrorKind::TypeError);

  std::vector<std::size_t> kept;
  for (std::size_t r = 0; r < t.num_rows(); ++r) {
    bool ok = true;
    for (std::size_t k = 0; k < q.where.size(); ++k) {
      o.highlighted.insert({r, conds[k]});
      const Value& cell = t.cell(r, conds[k]);
      const Value& lit = std::get<Value>(q.where[k].operand);
      bool holds;
      switch (q.where[k].op) {
        case CmpOp::Eq: holds = same_cell(cell, lit); break;
        default: {
          bool comparable = (cell.is_number() && lit.is_number()) || (cell.is_text() && lit.is_text());
          holds = comparable && (q.where[k].op == CmpOp::Gt ? asc_cmp(cell, lit) > 0 : asc_cmp(cell, lit) < 0);
        }
      }
      ok = ok && holds;
    }
    if (ok) kept.push_back(r);
  }

  if (q.order_by) {
    for (std::size_t r : kept) o.highlighted.insert({r, ord});
    // Position of each row = rows that must precede it plus earlier ties.
    std::vector<std::size_t> sorted(kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i) {
      std::size_t pos = 0;
      for (std::size_t j = 0; j < kept.size(); ++j) {
        if (j == i) continue;
        const Value& a = t.cell(kept[j], ord);
        const Value& b = t.cell(kept[i], ord);
        bool ahead = before(a, b, q.order_by->descending) || (!before(b, a, q.order_by->descending) && j < i);
        if (ahead) ++pos;
      }
      sorted[pos] = kept[i];
    }
    kept = sorted;
  }
  if (q.limit) {
    while (kept.size() > static_cast<std::size_t>(*q.limit)) kept.pop_back();
  }

  if (q.select.kind == SqlSelect::Kind::Column) {
    for (std::size_t r : kept) {
      if (t.cell(r, sel).is_empty()) continue;
      o.highlighted.insert({r, sel});
      o.values.push_back(t.cell(r, sel));
    }
    o.kind = o.values.empty() ? Kind::EmptySet : Kind::Cells;
    return o;
  }
  if (q.select.kind == SqlSelect::Kind::Agg) {
    for (std::size_t r : kept) o.highlighted.insert({r, sel});
    if (q.select.fn == AggFn::Count) {
      o.kind = Kind::Scalar;
      o.values = {Value::number(Decimal(static_cast<long long>(kept.size())))};
      return o;
    }
    std::vector<Value> nums;
    for (std::size_t r : kept) {
      if (t.cell(r, sel).is_number()) nums.push_back(t.cell(r, sel));
    }
    if (nums.empty()) {
      o.kind = Kind::EmptySet;
      return o;
    }
    o.kind = Kind::Scalar;
    if (q.select.fn == AggFn::Sum) {
      Decimal s(0);
      for (const Value& v : nums) s = s + v.number();
      o.values = {Value::number(s, unit_of(nums))};
      return o;
    }
    // First occurrence of the extreme value in output order.
    for (const Value& v : nums) {
      bool beaten = false;
      for (const Value& w : nums) {
        beaten = beaten || (q.select.fn == AggFn::Max ? w.number() > v.number() : w.number() < v.number());
      }
      if (!beaten) {
        o.values = {v};
        break;
      }
    }
    return o;
  }
  // Diff
  if (kept.empty()) return o;
  if (kept.size() != 1) fail(ExecErrorKind::AmbiguousRow);
  const Value& a = t.cell(kept[0], sel);
  const Value& b = t.cell(kept[0], other);
  o.highlighted.insert({kept[0], sel});
  o.highlighted.insert({kept[0], other});
  if (!a.is_number() || !b.is_number()) return o;
  o.kind = Kind::Scalar;
  o.values = {Value::number(a.number() - b.number(), unit_of({a, b}))};
  return o;
}

// ---------------------------------------------------------------------------
// Logical forms

using Mask = std::vector<bool>;
using LVal = std::variant<Mask, Value, bool>;

class Logic {
 public:
  Logic(const Table& t, Outcome& o) : t_(t), o_(o) {}

  LVal eval(const LogicNode& n) {
    switch (n.op) {
      case LogicOp::And: {
        bool a = as_bool(n.args[0]);
        bool b = as_bool(n.args[1]);
        return a && b;
      }
      case LogicOp::Eq:
      case LogicOp::NotEq:
      case LogicOp::Greater:
      case LogicOp::Less: {
        Value a = scalar(n.args[0]);
        Value b = scalar(n.args[1]);
        if (n.op == LogicOp::Eq) return claim_eq(a, b);
        if (n.op == LogicOp::NotEq) return !claim_eq(a, b);
        if (!a.is_number() || !b.is_number()) fail(ExecErrorKind::TypeError);
        if (within_tolerance(a.number(), b.number())) return false;
        return n.op == LogicOp::Greater ? b.number() < a.number() : a.number() < b.number();
      }
      case LogicOp::Count: {
        Mask m = rows(n.args[0]);
        long long c = 0;
        for (bool b : m) c += b;
        return Value::number(Decimal(c));
      }
      case LogicOp::Hop: {
        Mask m = rows(n.args[0]);
        std::size_t c = column(n.args[1]);
        std::vector<std::size_t> members = list(m);
        if (members.empty()) fail(ExecErrorKind::EmptyIntermediate);
        if (members.size() >= 2) o_.multi_row_hop = true;
        o_.highlighted.insert({members[0], c});
        if (t_.cell(members[0], c).is_empty()) fail(ExecErrorKind::EmptyIntermediate);
        return t_.cell(members[0], c);
      }
      case LogicOp::FilterEq:
      case LogicOp::FilterNotEq:
      case LogicOp::FilterGreater:
      case LogicOp::FilterLess: {
        Mask m = rows(n.args[0]);
        std::size_t c = column(n.args[1]);
        Value lit = literal(n.args[2]);
        bool ordered = n.op == LogicOp::FilterGreater || n.op == LogicOp::FilterLess;
        if (ordered && !lit.is_number()) fail(ExecErrorKind::TypeError);
        mark(m, c);
        Mask out(m.size(), false);
        for (std::size_t r = 0; r < m.size(); ++r) {
          if (!m[r]) continue;
          const Value& v = t_.cell(r, c);
          if (n.op == LogicOp::FilterEq) out[r] = same_cell(v, lit);
          else if (n.op == LogicOp::FilterNotEq) out[r] = !v.is_empty() && !same_cell(v, lit);
          else if (n.op == LogicOp::FilterGreater) out[r] = v.is_number() && lit.number() < v.number();
          else out[r] = v.is_number() && v.number() < lit.number();
        }
        return out;
      }
      case LogicOp::FilterAll: {
        Mask m = rows(n.args[0]);
        column(n.args[1]);
        return m;
      }
      case LogicOp::Argmax:
      case LogicOp::Argmin:
      case LogicOp::Max:
      case LogicOp::Min: {
        Mask m = rows(n.args[0]);
        std::size_t c = numeric_column(n.args[1]);
        mark(m, c);
        bool hi = n.op == LogicOp::Argmax || n.op == LogicOp::Max;
        std::optional<std::size_t> pick;
        for (std::size_t r : list(m)) {
          if (!t_.cell(r, c).is_number()) continue;
          bool best = true;
          for (std::size_t s : list(m)) {
            if (!t_.cell(s, c).is_number()) continue;
            const Decimal& x = t_.cell(r, c).number();
            const Decimal& y = t_.cell(s, c).number();
            if (hi ? y > x : y < x) best = false;
          }
          if (best) {
            pick = r;
            break;
          }
        }
        if (!pick) fail(ExecErrorKind::EmptyIntermediate);
        if (n.op == LogicOp::Max || n.op == LogicOp::Min) return t_.cell(*pick, c);
        Mask single(m.size(), false);
        single[*pick] = true;
        return single;
      }
      case LogicOp::Sum:
      case LogicOp::Avg: {
        Mask m = rows(n.args[0]);
        std::size_t c = numeric_column(n.args[1]);
        mark(m, c);
        std::vector<Value> nums;
        for (std::size_t r : list(m)) {
          if (t_.cell(r, c).is_number()) nums.push_back(t_.cell(r, c));
        }
        if (nums.empty()) fail(ExecErrorKind::EmptyIntermediate);
        Decimal s(0);
        for (const Value& v : nums) s = s + v.number();
        if (n.op == LogicOp::Avg) s = s / Decimal(static_cast<long long>(nums.size()));
        return Value::number(s, unit_of(nums));
      }
      case LogicOp::MostEq:
      case LogicOp::AllEq:
      case LogicOp::Unique: {
        Mask m = rows(n.args[0]);
        std::size_t c = column(n.args[1]);
        Value lit = literal(n.args[2]);
        mark(m, c);
        std::vector<std::size_t> members = list(m);
        if (members.empty()) fail(ExecErrorKind::EmptyIntermediate);
        std::size_t hits = 0;
        for (std::size_t r : members) hits += same_cell(t_.cell(r, c), lit);
        if (n.op == LogicOp::MostEq) return hits * 2 > members.size();
        if (n.op == LogicOp::AllEq) return hits == members.size();
        return hits == 1;
      }
      case LogicOp::NthMax:
      case LogicOp::NthMin:
      case LogicOp::NthArgmax:
      case LogicOp::NthArgmin: {
        Mask m = rows(n.args[0]);
        std::size_t c = numeric_column(n.args[1]);
        Value lit = literal(n.args[2]);
        if (!lit.is_number() || !lit.number().is_integer() || lit.number() < Decimal(1)) fail(ExecErrorKind::TypeError);
        mark(m, c);
        bool hi = n.op == LogicOp::NthMax || n.op == LogicOp::NthArgmax;
        std::vector<std::size_t> nums;
        for (std::size_t r : list(m)) {
          if (t_.cell(r, c).is_number()) nums.push_back(r);
        }
        if (lit.number() > Decimal(static_cast<long long>(nums.size()))) fail(ExecErrorKind::EmptyIntermediate);
        long long want = 0;
        for (Decimal k = lit.number(); k > Decimal(1); k = k - Decimal(1)) ++want;
        for (std::size_t r : nums) {
          long long rank = 0;
          for (std::size_t s : nums) {
            const Decimal& x = t_.cell(r, c).number();
            const Decimal& y = t_.cell(s, c).number();
            bool ahead = (hi ? y > x : y < x) || (y == x && s < r);
            rank += ahead;
          }
          if (rank == want) {
            if (n.op == LogicOp::NthMax || n.op == LogicOp::NthMin) return t_.cell(r, c);
            Mask single(m.size(), false);
            single[r] = true;
            return single;
          }
        }
        fail(ExecErrorKind::EmptyIntermediate);
      }
    }
    fail(ExecErrorKind::TypeError);
  }

  bool as_bool(const LogicArg& a) {
    LVal v = eval(*std::get<Box<LogicNode>>(a));
    if (!std::holds_alternative<bool>(v)) fail(ExecErrorKind::TypeError);
    return std::get<bool>(v);
  }

 private:
  Mask rows(const LogicArg& a) {
    if (std::holds_alternative<AllRows>(a)) return Mask(t_.num_rows(), true);
    LVal v = eval(*std::get<Box<LogicNode>>(a));
    if (!std::holds_alternative<Mask>(v)) fail(ExecErrorKind::TypeError);
    return std::get<Mask>(v);
  }

  Value scalar(const LogicArg& a) {
    if (const auto* b = std::get_if<Box<LogicNode>>(&a)) {
      LVal v = eval(**b);
      if (!std::holds_alternative<Value>(v)) fail(ExecErrorKind::TypeError);
      return std::get<Value>(v);
    }
    return literal(a);
  }

  Value literal(const LogicArg& a) {
    const auto& slot = std::get<ValueSlot>(a);
    if (!std::holds_alternative<Value>(slot)) fail(ExecErrorKind::OpenSlot);
    return std::get<Value>(slot);
  }

  std::size_t column(const LogicArg& a) { return col_index(t_, std::get<ColumnSlot>(a)); }

  std::size_t numeric_column(const LogicArg& a) {
    std::size_t c = column(a);
    if (!all_numeric(t_, c)) fail(ExecErrorKind::TypeError);
    return c;
  }

  static std::vector<std::size_t> list(const Mask& m) {
    std::vector<std::size_t> out;
    for (std::size_t r = 0; r < m.size(); ++r) {
      if (m[r]) out.push_back(r);
    }
    return out;
  }

  void mark(const Mask& m, std::size_t c) {
    for (std::size_t r : list(m)) o_.highlighted.insert({r, c});
  }

  const Table& t_;
  Outcome& o_;
};

// ---------------------------------------------------------------------------
// Arithmetic

std::optional<std::size_t> row_named(const Table& t, const std::string& label) {
  for (std::size_t r = 0; r < t.num_rows(); ++r) {
    if (t.cell(r, t.label_col()).surface() == label) return r;
  }
  for (std::size_t r = 0; r < t.num_rows(); ++r) {
    if (to_lower(t.cell(r, t.label_col()).surface()) == to_lower(label)) return r;
  }
  return std::nullopt;
}

Decimal raise(const Decimal& a, const Decimal& b) {
  if (b.is_integer() && b.abs() <= Decimal(64)) {
    if (a.is_zero() && b.is_negative()) fail(ExecErrorKind::DivideByZero);
    Decimal r(1);
    for (Decimal k = b.abs(); k > Decimal(0); k = k - Decimal(1)) r = r * a;
    return b.is_negative() ? Decimal(1) / r : r;
  }
  if (a.is_zero() && b.is_negative()) fail(ExecErrorKind::DivideByZero);
  if (a.is_negative()) fail(ExecErrorKind::Domain);
  double d = std::pow(a.to_double(), b.to_double());
  auto r = Decimal::from_double(d);
  if (!r) fail(ExecErrorKind::Domain);
  return *r;
}

Outcome arith(const ArithExpr& e, const Table& t) {
  Outcome o;
  std::vector<Decimal> done;
  for (const ArithStep& s : e.steps) {
    if (s.op == ArithOp::TableMax || s.op == ArithOp::TableMin || s.op == ArithOp::TableSum || s.op == ArithOp::TableAverage) {
      if (!std::holds_alternative<ColumnSlot>(s.args[0])) fail(ExecErrorKind::TypeError);
      std::size_t c = col_index(t, std::get<ColumnSlot>(s.args[0]));
      if (!all_numeric(t, c)) fail(ExecErrorKind::TypeError);
      std::vector<Decimal> xs;
      for (std::size_t r = 0; r < t.num_rows(); ++r) {
        o.highlighted.insert({r, c});
        if (t.cell(r, c).is_number()) xs.push_back(t.cell(r, c).number());
      }
      if (xs.empty()) fail(ExecErrorKind::EmptyIntermediate);
      Decimal acc = xs[0];
      Decimal total(0);
      for (const Decimal& x : xs) {
        if (s.op == ArithOp::TableMax && x > acc) acc = x;
        if (s.op == ArithOp::TableMin && x < acc) acc = x;
        total = total + x;
      }
      if (s.op == ArithOp::TableSum) acc = total;
      if (s.op == ArithOp::TableAverage) acc = total / Decimal(static_cast<long long>(xs.size()));
      done.push_back(acc);
      continue;
    }
    Decimal x[2];
    for (int k = 0; k < 2; ++k) {
      const ArithOperand& a = s.args[k];
      if (const auto* v = std::get_if<Value>(&a)) {
        if (!v->is_number()) fail(ExecErrorKind::TypeError);
        x[k] = v->number();
      } else if (const auto* cs = std::get_if<CellSel>(&a)) {
        std::optional<std::size_t> c;
        for (std::size_t i = 0; i < t.num_cols(); ++i) {
          if (t.column_names()[i] == cs->column) c = i;
        }
        if (!c) fail(ExecErrorKind::UnresolvedCell);
        auto r = row_named(t, cs->row);
        if (!r) fail(ExecErrorKind::UnresolvedCell);
        o.highlighted.insert({*r, *c});
        o.highlighted.insert({*r, t.label_col()});
        if (!t.cell(*r, *c).is_number()) fail(ExecErrorKind::TypeError);
        x[k] = t.cell(*r, *c).number();
      } else if (const auto* ref = std::get_if<StepRef>(&a)) {
        if (ref->index >= done.size()) fail(ExecErrorKind::UnresolvedCell);
        x[k] = done[ref->index];
      } else if (std::holds_alternative<ValuePlaceholder>(a)) {
        fail(ExecErrorKind::OpenSlot);
      } else {
        fail(ExecErrorKind::TypeError);
      }
    }
    switch (s.op) {
      case ArithOp::Add: done.push_back(x[0] + x[1]); break;
      case ArithOp::Subtract: done.push_back(x[0] - x[1]); break;
      case ArithOp::Multiply: done.push_back(x[0] * x[1]); break;
      case ArithOp::Divide:
        if (x[1] == Decimal(0)) fail(ExecErrorKind::DivideByZero);
        done.push_back(x[0] / x[1]);
        break;
      case ArithOp::Greater: done.push_back(x[1] < x[0] ? Decimal(1) : Decimal(0)); break;
      case ArithOp::Exp: done.push_back(raise(x[0], x[1])); break;
      default: fail(ExecErrorKind::TypeError);
    }
  }
  if (done.empty()) fail(ExecErrorKind::TypeError);
  o.kind = Kind::Scalar;
  o.values = {Value::number(done.back())};
  return o;
}

}  // namespace

Outcome evaluate(const Program& p, const Table& t) {
  try {
    switch (p.family) {
      case Family::Sql: return sql(p.sql(), t);
      case Family::Arith: return arith(p.arith(), t);
      case Family::Logic: {
        Outcome o;
        Logic l(t, o);
        LVal v = l.eval(p.logic());
        if (!std::holds_alternative<bool>(v)) fail(ExecErrorKind::TypeError);
        o.kind = Kind::Bool;
        o.boolean = std::get<bool>(v);
        return o;
      }
    }
  } catch (const Fail& f) {
    Outcome o;
    o.error = f.kind;
    return o;
  }
  return {};
}

std::string compare(const Program& p, const Table& t) {
  Outcome want = evaluate(p, t);
  std::ostringstream why;
  ExecResult got;
  try {
    got = execute(p, t);
  } catch (const ExecError& e) {
    if (!want.error) return std::string("executor raised ") + e.what() + ", oracle did not";
    if (*want.error != e.kind()) return std::string("executor raised ") + to_string(e.kind()) + ", oracle " + to_string(*want.error);
    return {};
  }
  if (want.error) return std::string("oracle raised ") + to_string(*want.error) + ", executor returned";
  if (got.kind != want.kind) return std::string("kind ") + to_string(got.kind) + " vs " + to_string(want.kind);
  switch (got.kind) {
    case Kind::Scalar:
      if (!got.scalar.identical(want.values.at(0))) return "scalar " + got.scalar.surface() + " vs " + want.values[0].surface();
      break;
    case Kind::Cells:
      if (got.cells.size() != want.values.size()) return "cell count differs";
      for (std::size_t i = 0; i < got.cells.size(); ++i) {
        if (!got.cells[i].identical(want.values[i])) return "cell " + std::to_string(i) + " differs";
      }
      break;
    case Kind::Bool:
      if (got.boolean != want.boolean) return "boolean differs";
      break;
    case Kind::EmptySet: break;
  }
  if (got.kind != Kind::EmptySet && got.highlighted != want.highlighted) return "highlighted cells differ";
  if (got.multi_row_hop != want.multi_row_hop) return "multi_row_hop differs";
  return {};
}

}  // namespace oracle
