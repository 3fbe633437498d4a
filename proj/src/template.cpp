#include "tabsynth/template.hpp"

#include "tabsynth/error.hpp"

#include "program_internal.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <unordered_set>

namespace tabsynth {

namespace {

using ColumnVisitor = std::function<void(ColumnSlot&)>;
using ValueVisitor = std::function<void(ValuePlaceholder&)>;

// Visits column slots and value placeholders in print order.
void visit_logic(LogicNode& n, const ColumnVisitor& on_col, const ValueVisitor& on_val) {
  for (auto& a : n.args) {
    if (auto* c = std::get_if<ColumnSlot>(&a)) on_col(*c);
    else if (auto* v = std::get_if<ValueSlot>(&a)) {
      if (auto* ph = std::get_if<ValuePlaceholder>(v)) on_val(*ph);
    } else if (auto* b = std::get_if<Box<LogicNode>>(&a)) {
      visit_logic(**b, on_col, on_val);
    }
  }
}

void visit(Program& p, const ColumnVisitor& on_col, const ValueVisitor& on_val) {
  if (auto* q = std::get_if<SqlQuery>(&p.ast)) {
    on_col(q->select.column);
    if (q->select.kind == SqlSelect::Kind::Diff) on_col(q->select.other);
    for (auto& c : q->where) {
      on_col(c.column);
      if (auto* ph = std::get_if<ValuePlaceholder>(&c.operand)) on_val(*ph);
    }
    if (q->order_by) on_col(q->order_by->column);
  } else if (auto* n = std::get_if<LogicNode>(&p.ast)) {
    visit_logic(*n, on_col, on_val);
  } else {
    for (auto& step : std::get<ArithExpr>(p.ast).steps) {
      for (auto& a : step.args) {
        if (auto* c = std::get_if<ColumnSlot>(&a)) on_col(*c);
        else if (auto* ph = std::get_if<ValuePlaceholder>(&a)) on_val(*ph);
      }
    }
  }
}

class Analyzer {
 public:
  explicit Analyzer(ProgramTemplate& t) : t_(t) {}

  void run() {
    Program& p = t_.body;
    if (auto* q = std::get_if<SqlQuery>(&p.ast)) {
      bool numeric_select = q->select.kind == SqlSelect::Kind::Diff ||
                            (q->select.kind == SqlSelect::Kind::Agg && q->select.fn != AggFn::Count);
      note_column(q->select.column, numeric_select);
      if (q->select.kind == SqlSelect::Kind::Diff) note_column(q->select.other, true);
      for (auto& c : q->where) {
        note_column(c.column, false);
        if (auto* ph = std::get_if<ValuePlaceholder>(&c.operand)) {
          note_value(ph->index, ValuePlaceholderInfo::Role::ColumnValue, c.column, 0);
        }
      }
      if (q->order_by) note_column(q->order_by->column, false);
    } else if (auto* n = std::get_if<LogicNode>(&p.ast)) {
      walk_logic(*n, true);
    } else {
      for (auto& step : std::get<ArithExpr>(p.ast).steps) {
        for (auto& a : step.args) {
          if (auto* c = std::get_if<ColumnSlot>(&a)) note_column(*c, true);
          else if (auto* ph = std::get_if<ValuePlaceholder>(&a)) note_value(ph->index, ValuePlaceholderInfo::Role::Cell, {}, 0);
        }
      }
    }
    // Settle every occurrence on the placeholder's resolved type.
    visit(p,
          [&](ColumnSlot& c) {
            if (auto* ph = std::get_if<ColumnPlaceholder>(&c)) ph->type = columns_[ph->index];
          },
          [](ValuePlaceholder&) {});
    for (const auto& [index, type] : columns_) t_.columns.push_back({index, type});
    for (auto& [index, info] : values_) {
      if (info.column) {
        if (auto* ph = std::get_if<ColumnPlaceholder>(&*info.column)) ph->type = columns_[ph->index];
      }
      t_.values.push_back(info);
    }
  }

 private:
  void note_column(const ColumnSlot& c, bool numeric) {
    const auto* ph = std::get_if<ColumnPlaceholder>(&c);
    if (!ph) return;
    SlotType& type = columns_.try_emplace(ph->index, SlotType::Any).first->second;
    if (numeric || ph->type == SlotType::Number) type = SlotType::Number;
  }

  void note_value(int index, ValuePlaceholderInfo::Role role, std::optional<ColumnSlot> column, std::size_t pos) {
    ValuePlaceholderInfo info{index, role, std::move(column)};
    auto [it, inserted] = values_.try_emplace(index, info);
    if (inserted) return;
    const auto& prev = it->second;
    auto same_column = [](const std::optional<ColumnSlot>& a, const std::optional<ColumnSlot>& b) {
      if (a.has_value() != b.has_value()) return false;
      if (!a) return true;
      const auto* pa = std::get_if<ColumnPlaceholder>(&*a);
      const auto* pb = std::get_if<ColumnPlaceholder>(&*b);
      if (pa && pb) return pa->index == pb->index;
      return *a == *b;
    };
    if (prev.role != role || !same_column(prev.column, info.column) || role == ValuePlaceholderInfo::Role::Claim) {
      throw DanglingValue("val" + std::to_string(index) + " is used with conflicting columns or roles", pos);
    }
  }

  void walk_logic(LogicNode& n, bool claim_position) {
    const OpSignature& sig = signature(n.op);
    const ColumnSlot* node_column = nullptr;
    for (std::size_t k = 0; k < n.args.size(); ++k) {
      if (sig.args[k] == ArgKind::Column) {
        node_column = &std::get<ColumnSlot>(n.args[k]);
        note_column(*node_column, sig.numeric_column);
      }
    }
    for (std::size_t k = 0; k < n.args.size(); ++k) {
      auto& a = n.args[k];
      if (auto* b = std::get_if<Box<LogicNode>>(&a)) {
        walk_logic(**b, claim_position && n.op == LogicOp::And);
        continue;
      }
      auto* v = std::get_if<ValueSlot>(&a);
      if (!v) continue;
      auto* ph = std::get_if<ValuePlaceholder>(v);
      if (!ph) continue;
      if (sig.args[k] == ArgKind::Value && node_column) {
        note_value(ph->index, ValuePlaceholderInfo::Role::ColumnValue, *node_column, 0);
      } else if (is_comparison(n.op) && k == 1 && claim_position) {
        note_value(ph->index, ValuePlaceholderInfo::Role::Claim, {}, 0);
      } else {
        throw DanglingValue("val" + std::to_string(ph->index) + " has no column to draw from", 0);
      }
    }
  }

  ProgramTemplate& t_;
  std::map<int, SlotType> columns_;
  std::map<int, ValuePlaceholderInfo> values_;
};

}  // namespace

const ColumnPlaceholderInfo* ProgramTemplate::column_info(int index) const {
  for (const auto& c : columns) {
    if (c.index == index) return &c;
  }
  return nullptr;
}

const ValuePlaceholderInfo* ProgramTemplate::value_info(int index) const {
  for (const auto& v : values) {
    if (v.index == index) return &v;
  }
  return nullptr;
}

ProgramTemplate parse_template(std::string_view text, Family family) {
  ProgramTemplate t;
  t.body = detail::parse(text, family, true);
  Analyzer(t).run();
  t.canonical_key = canonicalize(t);
  return t;
}

std::string canonicalize(const ProgramTemplate& t) {
  Program p = t.body;
  std::map<int, int> column_ids, value_ids;
  visit(p,
        [&](ColumnSlot& c) {
          if (auto* ph = std::get_if<ColumnPlaceholder>(&c)) {
            auto [it, _] = column_ids.try_emplace(ph->index, static_cast<int>(column_ids.size()) + 1);
            ph->index = it->second;
          }
        },
        [&](ValuePlaceholder& ph) {
          auto [it, _] = value_ids.try_emplace(ph.index, static_cast<int>(value_ids.size()) + 1);
          ph.index = it->second;
        });
  return std::string(to_string(p.family)) + "|" + print_program(p);
}

std::vector<ProgramTemplate> dedupe_templates(std::vector<ProgramTemplate> templates) {
  std::vector<ProgramTemplate> out;
  std::unordered_set<std::string> seen;
  for (auto& t : templates) {
    if (seen.insert(t.canonical_key).second) out.push_back(std::move(t));
  }
  return out;
}

std::vector<ProgramTemplate> parse_template_pack(std::string_view text) {
  std::vector<ProgramTemplate> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    auto bar = s.find('|');
    if (bar == std::string::npos) {
      throw ConfigError("template pack line " + std::to_string(line_no) + ": expected 'family|template'");
    }
    std::string prefix = trim(std::string_view(s).substr(0, bar));
    double weight = 1.0;
    if (auto star = prefix.find('*'); star != std::string::npos) {
      std::string w = trim(std::string_view(prefix).substr(star + 1));
      prefix = trim(std::string_view(prefix).substr(0, star));
      try {
        std::size_t used = 0;
        weight = std::stod(w, &used);
        if (used != w.size() || !(weight > 0)) throw std::invalid_argument(w);
      } catch (const std::exception&) {
        throw ConfigError("template pack line " + std::to_string(line_no) + ": bad weight '" + w + "'");
      }
    }
    auto family = family_from_string(prefix);
    if (!family) throw ConfigError("template pack line " + std::to_string(line_no) + ": unknown family '" + prefix + "'");
    try {
      ProgramTemplate t = parse_template(std::string_view(s).substr(bar + 1), *family);
      t.weight = weight;
      out.push_back(std::move(t));
    } catch (const ParseError& e) {
      throw ConfigError("template pack line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<ProgramTemplate> load_template_pack(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open template pack " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_template_pack(ss.str());
}

}  // namespace tabsynth
