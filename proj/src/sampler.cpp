#include "tabsynth/sampler.hpp"

#include "tabsynth/error.hpp"

#include <algorithm>
#include <set>

namespace tabsynth {

void SamplerConfig::validate() const {
  if (!(label_ratio >= 0.0 && label_ratio <= 1.0)) throw ConfigError("label_ratio must lie in [0, 1]");
  if (max_attempts_per_template < 1) throw ConfigError("max_attempts_per_template must be at least 1");
}

const char* to_string(Label l) { return l == Label::Supported ? "Supported" : "Refuted"; }

std::optional<Label> label_from_string(std::string_view s) {
  if (s == "Supported") return Label::Supported;
  if (s == "Refuted") return Label::Refuted;
  return std::nullopt;
}

Value literal_form(const Value& v) {
  if (v.is_number()) return Value::number(*Decimal::parse(v.number().to_string()));
  if (v.is_text()) return Value::text(v.text_value());
  return v;
}

namespace {

std::size_t pick(Rng& rng, std::size_t n) { return static_cast<std::size_t>(rng.uniform(n)); }

std::string column_name(const ColumnSlot& c, const Binding& b) {
  if (const auto* name = std::get_if<std::string>(&c)) return *name;
  int index = std::get<ColumnPlaceholder>(c).index;
  auto it = b.columns.find(index);
  if (it == b.columns.end()) throw IncompleteBinding("c" + std::to_string(index) + " is unbound");
  return it->second;
}

}  // namespace

Binding sample_binding(const ProgramTemplate& t, const Table& table, Rng& rng) {
  Binding b;
  std::vector<bool> taken(table.num_cols(), false);
  for (const std::string& name : referenced_columns(t.body)) {
    auto col = table.find_column(name);
    if (!col) throw NoEligibleColumns("table has no column '" + name + "'");
    taken[*col] = true;
  }

  auto draw_column = [&](int index, bool numeric) {
    std::vector<std::size_t> eligible;
    for (std::size_t c = 0; c < table.num_cols(); ++c) {
      if (!taken[c] && (!numeric || table.column_type(c) == ColumnType::Numeric)) eligible.push_back(c);
    }
    if (eligible.empty()) {
      throw NoEligibleColumns(std::string("no ") + (numeric ? "numeric " : "") + "column left for c" + std::to_string(index));
    }
    std::size_t c = eligible[pick(rng, eligible.size())];
    taken[c] = true;
    b.columns[index] = table.column_names()[c];
  };
  for (const auto& info : t.columns) {
    if (info.type == SlotType::Number) draw_column(info.index, true);
  }
  for (const auto& info : t.columns) {
    if (info.type == SlotType::Any) draw_column(info.index, false);
  }

  std::vector<CellRef> cell_pool;
  bool pool_ready = false;
  for (const auto& info : t.values) {
    switch (info.role) {
      case ValuePlaceholderInfo::Role::Claim: break;
      case ValuePlaceholderInfo::Role::ColumnValue: {
        std::string name = column_name(*info.column, b);
        auto col = table.find_column(name);
        if (!col) throw NoEligibleColumns("table has no column '" + name + "'");
        std::vector<std::size_t> rows;
        for (std::size_t r = 0; r < table.num_rows(); ++r) {
          if (!table.cell(r, *col).is_empty()) rows.push_back(r);
        }
        if (rows.empty()) throw NoEligibleValues("column '" + name + "' has no values");
        std::size_t r = rows[pick(rng, rows.size())];
        b.values[info.index] = {table.cell(r, *col), {r, *col}, name, {}};
        break;
      }
      case ValuePlaceholderInfo::Role::Cell: {
        if (!pool_ready) {
          const std::size_t label = table.label_col();
          for (std::size_t r = 0; r < table.num_rows(); ++r) {
            const Value& row_label = table.cell(r, label);
            if (row_label.is_empty()) continue;
            auto found = table.find_row(row_label.surface());
            if (!found || *found != r) continue;
            for (std::size_t c = 0; c < table.num_cols(); ++c) {
              if (c != label && table.column_type(c) == ColumnType::Numeric && table.cell(r, c).is_number()) {
                cell_pool.push_back({r, c});
              }
            }
          }
          pool_ready = true;
        }
        if (cell_pool.empty()) throw NoEligibleColumns("no addressable numeric cell left for val" + std::to_string(info.index));
        std::size_t k = pick(rng, cell_pool.size());
        CellRef cell = cell_pool[k];
        cell_pool.erase(cell_pool.begin() + static_cast<std::ptrdiff_t>(k));
        b.values[info.index] = {table.cell(cell.row, cell.col), cell, table.column_names()[cell.col],
                                table.cell(cell.row, table.label_col()).surface()};
        break;
      }
    }
  }
  return b;
}

namespace {

class Substituter {
 public:
  Substituter(const ProgramTemplate& t, const Binding& b) : t_(t), b_(b) {}

  void column(ColumnSlot& c) const {
    if (std::holds_alternative<ColumnPlaceholder>(c)) c = column_name(c, b_);
  }

  const BoundValue& bound(int index) const {
    auto it = b_.values.find(index);
    if (it == b_.values.end()) throw IncompleteBinding("val" + std::to_string(index) + " is unbound");
    return it->second;
  }

  bool is_claim(int index) const {
    const auto* info = t_.value_info(index);
    return info && info->role == ValuePlaceholderInfo::Role::Claim;
  }

  void value(ValueSlot& v) const {
    if (const auto* ph = std::get_if<ValuePlaceholder>(&v)) {
      if (is_claim(ph->index)) return;
      v = literal_form(bound(ph->index).value);
    }
  }

  void logic(LogicNode& n) const {
    for (auto& a : n.args) {
      if (auto* c = std::get_if<ColumnSlot>(&a)) column(*c);
      else if (auto* v = std::get_if<ValueSlot>(&a)) value(*v);
      else if (auto* box = std::get_if<Box<LogicNode>>(&a)) logic(**box);
    }
  }

  void run(Program& p) const {
    if (auto* q = std::get_if<SqlQuery>(&p.ast)) {
      column(q->select.column);
      if (q->select.kind == SqlSelect::Kind::Diff) column(q->select.other);
      for (auto& c : q->where) {
        column(c.column);
        value(c.operand);
      }
      if (q->order_by) column(q->order_by->column);
    } else if (auto* n = std::get_if<LogicNode>(&p.ast)) {
      logic(*n);
    } else {
      for (auto& step : std::get<ArithExpr>(p.ast).steps) {
        for (auto& a : step.args) {
          if (auto* c = std::get_if<ColumnSlot>(&a)) {
            column(*c);
          } else if (const auto* ph = std::get_if<ValuePlaceholder>(&a)) {
            const BoundValue& bv = bound(ph->index);
            a = CellSel{bv.column, bv.row_label};
          }
        }
      }
    }
  }

 private:
  const ProgramTemplate& t_;
  const Binding& b_;
};

// ---------------------------------------------------------------------------

struct Offset {
  Decimal amount;
  const char* kind;
};

class ClaimDecider {
 public:
  ClaimDecider(const Table& table, Rng& rng) : table_(table), rng_(rng) {}

  void decide(LogicNode& n, Label target) {
    if (n.op == LogicOp::And) {
      if (target == Label::Supported) {
        decide(child(n, 0), Label::Supported);
        decide(child(n, 1), Label::Supported);
        return;
      }
      const std::size_t first = pick(rng_, 2);
      for (std::size_t refuted : {first, 1 - first}) {
        LogicNode copy = n;
        std::vector<std::string> saved = kinds_;
        try {
          decide(child(copy, refuted), Label::Refuted);
          decide(child(copy, 1 - refuted), Label::Supported);
          n = std::move(copy);
          return;
        } catch (const CannotPerturb&) {
          kinds_ = std::move(saved);
        }
      }
      throw CannotPerturb("neither conjunct can be refuted");
    }
    if (is_comparison(n.op) && is_open(n.args[1])) {
      close(n, target);
      return;
    }
    LogicEvaluator ev(table_);
    if (ev.eval_bool(n) != (target == Label::Supported)) {
      throw CannotPerturb(std::string("claim is fixed to ") + (target == Label::Supported ? "false" : "true"));
    }
    kinds_.push_back("fixed");
  }

  std::string kinds() const {
    std::string out;
    for (std::size_t i = 0; i < kinds_.size(); ++i) {
      if (std::find(kinds_.begin(), kinds_.begin() + static_cast<std::ptrdiff_t>(i), kinds_[i]) != kinds_.begin() + static_cast<std::ptrdiff_t>(i)) continue;
      if (!out.empty()) out += ",";
      out += kinds_[i];
    }
    return out;
  }

 private:
  static LogicNode& child(LogicNode& n, std::size_t k) { return *std::get<Box<LogicNode>>(n.args[k]); }

  static bool is_open(const LogicArg& a) {
    const auto* v = std::get_if<ValueSlot>(&a);
    return v && std::holds_alternative<ValuePlaceholder>(*v);
  }

  bool holds(LogicNode& n, const Value& arg2, Label target) {
    n.args[1] = ValueSlot(arg2);
    LogicEvaluator ev(table_);
    return ev.eval_bool(n) == (target == Label::Supported);
  }

  void close(LogicNode& n, Label target) {
    Value r;
    {
      LogicEvaluator ev(table_);
      r = ev.eval_scalar(n.args[0]);
    }
    if (r.is_empty()) throw CannotPerturb("first argument evaluated to an empty cell");
    const bool want_true = target == Label::Supported;

    if (n.op == LogicOp::Eq || n.op == LogicOp::NotEq) {
      const bool equal = (n.op == LogicOp::Eq) == want_true;
      if (equal) {
        if (!holds(n, literal_form(r), target)) throw CannotPerturb("value does not survive its literal form");
        kinds_.push_back("exact");
        return;
      }
      if (r.is_number()) {
        offset(n, r, target, std::nullopt);
      } else {
        other_column_value(n, r, target);
      }
      return;
    }
    if (!r.is_number()) throw CannotPerturb("ordering claim over a non-number");
    // greater: arg1 > arg2 holds when arg2 sits below arg1.
    const bool below = (n.op == LogicOp::Greater) == want_true;
    offset(n, r, target, !below);
  }

  void offset(LogicNode& n, const Value& r, Label target, std::optional<bool> upward) {
    const Decimal& x = r.number();
    const Decimal mag = x.abs();
    std::vector<Offset> offsets = {{Decimal(1), "offset_1"},
                                   {mag / Decimal(10), "offset_10pct"},
                                   {mag / Decimal(4), "offset_25pct"}};
    if (x.is_integer()) {
      for (auto& o : offsets) o.amount = std::max(o.amount.round(), Decimal(1));
    }
    std::vector<Offset> distinct;
    for (const auto& o : offsets) {
      if (o.amount.is_zero()) continue;
      bool seen = std::any_of(distinct.begin(), distinct.end(), [&](const Offset& d) { return d.amount == o.amount; });
      if (!seen) distinct.push_back(o);
    }
    rng_.shuffle(distinct);
    for (const auto& o : distinct) {
      bool up = upward ? *upward : rng_.bernoulli(0.5);
      if (!up && !x.is_negative() && (x - o.amount).is_negative()) {
        if (upward) continue;
        up = true;
      }
      Value candidate = literal_form(Value::number(up ? x + o.amount : x - o.amount));
      if (holds(n, candidate, target)) {
        kinds_.push_back(o.kind);
        return;
      }
    }
    throw CannotPerturb("no offset reaches the target label");
  }

  void other_column_value(LogicNode& n, const Value& r, Label target) {
    const auto* inner = std::get_if<Box<LogicNode>>(&n.args[0]);
    if (!inner) throw CannotPerturb("first argument has no column");
    const OpSignature& sig = signature((*inner)->op);
    std::optional<std::size_t> col;
    for (std::size_t k = 0; k < sig.args.size(); ++k) {
      if (sig.args[k] == ArgKind::Column) {
        const auto* name = std::get_if<std::string>(&std::get<ColumnSlot>((*inner)->args[k]));
        if (name) col = table_.find_column(*name);
      }
    }
    if (!col) throw CannotPerturb("first argument has no column");
    std::vector<Value> candidates;
    for (std::size_t row = 0; row < table_.num_rows(); ++row) {
      const Value& v = table_.cell(row, *col);
      if (v.is_empty() || claim_equal(v, r)) continue;
      bool seen = std::any_of(candidates.begin(), candidates.end(), [&](const Value& c) { return c.identical(v); });
      if (!seen) candidates.push_back(v);
    }
    if (candidates.empty()) throw CannotPerturb("column has no other value");
    if (!holds(n, literal_form(candidates[pick(rng_, candidates.size())]), target)) {
      throw CannotPerturb("replacement value does not reach the target label");
    }
    kinds_.push_back("column_value");
  }

  const Table& table_;
  Rng& rng_;
  std::vector<std::string> kinds_;
};

}  // namespace

Program instantiate(const ProgramTemplate& t, const Binding& b) {
  Program p = t.body;
  Substituter(t, b).run(p);
  return p;
}

ClaimDecision decide_claim_arg(const Program& p, const Table& table, Label target, Rng& rng) {
  if (p.family != Family::Logic) throw CannotPerturb("only logical forms carry claims");
  LogicNode root = p.logic();
  ClaimDecider decider(table, rng);
  decider.decide(root, target);
  return {Program{Family::Logic, std::move(root)}, target, decider.kinds()};
}

SampleOutcome sample_program(const ProgramTemplate& t, const Table& table, const SamplerConfig& cfg, Rng& rng) {
  SampleOutcome out;
  std::optional<Label> label;
  if (t.body.family == Family::Logic) {
    label = rng.bernoulli(cfg.label_ratio) ? Label::Supported : Label::Refuted;
  }
  while (out.attempts < cfg.max_attempts_per_template) {
    ++out.attempts;
    try {
      Binding binding = sample_binding(t, table, rng);
      Program program = instantiate(t, binding);
      std::string perturbation;
      if (label) {
        ClaimDecision d = decide_claim_arg(program, table, *label, rng);
        program = std::move(d.program);
        perturbation = std::move(d.perturbation);
      }
      ExecResult result = execute(program, table);
      if (result.is_empty_set()) {
        ++out.failures["empty_result"];
        continue;
      }
      if (label && result.boolean != (*label == Label::Supported)) {
        ++out.failures["label_mismatch"];
        continue;
      }
      out.sample = SampledProgram{std::move(program), std::move(binding), std::move(result), label, std::move(perturbation)};
      return out;
    } catch (const NoEligibleColumns&) {
      ++out.failures["no_eligible_columns"];
      return out;
    } catch (const NoEligibleValues&) {
      ++out.failures["no_eligible_values"];
    } catch (const CannotPerturb&) {
      ++out.failures["cannot_perturb"];
    } catch (const ExecError& e) {
      ++out.failures[std::string("exec_") + to_string(e.kind())];
    }
  }
  return out;
}

}  // namespace tabsynth
