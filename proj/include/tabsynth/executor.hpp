#pragma once

#include "tabsynth/program.hpp"
#include "tabsynth/table.hpp"

#include <set>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace tabsynth {

/// Outcome of running a program against a table, plus every cell the
/// evaluation read.
struct ExecResult {
  enum class Kind { Scalar, Cells, Bool, EmptySet };

  Kind kind = Kind::EmptySet;
  Value scalar;
  std::vector<Value> cells;
  bool boolean = false;
  std::set<CellRef> highlighted;
  /// A logical-form hop read the first row of a multi-row set.
  bool multi_row_hop = false;

  static ExecResult empty_set() { return {}; }
  bool is_empty_set() const { return kind == Kind::EmptySet; }

  /// Same kind and semantically equal payload; highlights ignored.
  bool same_value(const ExecResult& other) const;
};

const char* to_string(ExecResult::Kind k);

/// Row indices into the bound table. Original order unless an ordering
/// operator produced them.
using RowSet = std::vector<std::size_t>;

/// Dispatches on the program family. Throws ExecError.
ExecResult execute(const Program& p, const Table& t);

ExecResult exec_sql(const SqlQuery& q, const Table& t);
ExecResult exec_logic(const LogicNode& root, const Table& t);
ExecResult exec_arith(const ArithExpr& e, const Table& t);

/// Bottom-up evaluator for logical forms. Exposed so claim construction can
/// evaluate the first argument of a comparison on its own.
class LogicEvaluator {
 public:
  using Result = std::variant<RowSet, Value, bool>;

  explicit LogicEvaluator(const Table& t) : table_(t) {}

  Result eval(const LogicNode& n);
  Value eval_scalar(const LogicArg& a);
  bool eval_bool(const LogicNode& n);

  const std::set<CellRef>& highlighted() const { return highlighted_; }
  bool multi_row_hop() const { return multi_row_hop_; }

 private:
  RowSet eval_rows(const LogicArg& a);
  std::size_t column(const LogicArg& a) const;
  const Value& literal(const LogicArg& a) const;
  void require_numeric(std::size_t col, std::string_view op) const;
  void highlight_column(const RowSet& rows, std::size_t col);

  const Table& table_;
  std::set<CellRef> highlighted_;
  bool multi_row_hop_ = false;
};

/// Equality used by filters and majority operators: exact, Empty matches
/// nothing.
bool cell_matches(const Value& cell, const Value& v);
/// Comparison used by eq/not_eq roots: Numbers within 1e-9 relative
/// tolerance, Text exactly, anything else unequal.
bool claim_equal(const Value& a, const Value& b);

nlohmann::json exec_result_to_json(const ExecResult& r);
/// The denotation as it appears in a sample: a string for scalars, an array
/// of strings for cell lists, a boolean for logical forms.
nlohmann::json answer_to_json(const ExecResult& r);

}  // namespace tabsynth
