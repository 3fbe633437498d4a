#pragma once

#include "tabsynth/value.hpp"

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace tabsynth {

enum class Family { Sql, Logic, Arith };

const char* to_string(Family f);
std::optional<Family> family_from_string(std::string_view s);

/// Heap-allocated value with value semantics, for recursive ASTs.
template <class T>
class Box {
 public:
  Box(T v) : ptr_(std::make_unique<T>(std::move(v))) {}  // NOLINT(google-explicit-constructor)
  Box(const Box& o) : ptr_(std::make_unique<T>(*o.ptr_)) {}
  Box(Box&&) noexcept = default;
  Box& operator=(const Box& o) {
    if (this != &o) ptr_ = std::make_unique<T>(*o.ptr_);
    return *this;
  }
  Box& operator=(Box&&) noexcept = default;

  T& operator*() { return *ptr_; }
  const T& operator*() const { return *ptr_; }
  T* operator->() { return ptr_.get(); }
  const T* operator->() const { return ptr_.get(); }

  friend bool operator==(const Box& a, const Box& b) { return *a.ptr_ == *b.ptr_; }

 private:
  std::unique_ptr<T> ptr_;
};

// ---------------------------------------------------------------------------
// Placeholders. Templates use `cK` / `cK_number` for columns and `valK` for
// values; instantiated programs contain none (except open claim slots of a
// logical form before its second argument is decided).

enum class SlotType { Any, Number };

struct ColumnPlaceholder {
  int index = 0;
  SlotType type = SlotType::Any;
  friend bool operator==(const ColumnPlaceholder&, const ColumnPlaceholder&) = default;
};

struct ValuePlaceholder {
  int index = 0;
  friend bool operator==(const ValuePlaceholder&, const ValuePlaceholder&) = default;
};

using ColumnSlot = std::variant<std::string, ColumnPlaceholder>;
using ValueSlot = std::variant<Value, ValuePlaceholder>;

// ---------------------------------------------------------------------------
// SQL: single-table select with AND-ed conditions, order by and limit.

enum class AggFn { Count, Max, Min, Sum };
enum class CmpOp { Eq, Gt, Lt };

struct SqlSelect {
  enum class Kind { Column, Agg, Diff };
  Kind kind = Kind::Column;
  AggFn fn = AggFn::Count;  // Agg only
  ColumnSlot column;
  ColumnSlot other;  // Diff only: column - other
  friend bool operator==(const SqlSelect&, const SqlSelect&) = default;
};

struct SqlCondition {
  ColumnSlot column;
  CmpOp op = CmpOp::Eq;
  ValueSlot operand;
  friend bool operator==(const SqlCondition&, const SqlCondition&) = default;
};

struct SqlOrder {
  ColumnSlot column;
  bool descending = false;
  friend bool operator==(const SqlOrder&, const SqlOrder&) = default;
};

struct SqlQuery {
  SqlSelect select;
  std::vector<SqlCondition> where;
  std::optional<SqlOrder> order_by;
  std::optional<std::int64_t> limit;
  friend bool operator==(const SqlQuery&, const SqlQuery&) = default;
};

// ---------------------------------------------------------------------------
// Logical forms: `op { arg ; arg ; ... }` trees rooted at a boolean operator.

enum class LogicOp {
  Eq, NotEq, Greater, Less,
  Hop, Count,
  FilterEq, FilterNotEq, FilterGreater, FilterLess, FilterAll,
  Argmax, Argmin,
  Max, Min, Sum, Avg,
  MostEq, AllEq, Unique,
  NthMax, NthMin, NthArgmax, NthArgmin,
  And,
};

enum class ArgKind {
  Rows,     // row-set node or all_rows
  Column,   // column name
  Value,    // literal compared against cells
  Scalar,   // scalar node or literal
  Bool,     // boolean node
  Ordinal,  // positive integer literal
};
enum class ResultKind { Rows, Scalar, Bool };

struct OpSignature {
  LogicOp op;
  std::string_view name;
  std::vector<ArgKind> args;
  ResultKind result;
  /// The column argument must be Numeric.
  bool numeric_column = false;
};

const OpSignature& signature(LogicOp op);
const OpSignature* find_logic_op(std::string_view name);
const std::vector<OpSignature>& logic_ops();
bool is_comparison(LogicOp op);

struct AllRows {
  friend bool operator==(const AllRows&, const AllRows&) = default;
};

struct LogicNode;
using LogicArg = std::variant<AllRows, ColumnSlot, ValueSlot, Box<LogicNode>>;

struct LogicNode {
  LogicOp op = LogicOp::Eq;
  std::vector<LogicArg> args;
  friend bool operator==(const LogicNode&, const LogicNode&) = default;
};

// ---------------------------------------------------------------------------
// Arithmetic expressions: ordered steps with `#i` back-references.

enum class ArithOp { Add, Subtract, Multiply, Divide, Greater, Exp, TableMax, TableMin, TableSum, TableAverage };

const char* to_string(ArithOp op);
bool is_table_op(ArithOp op);

/// `col of row`: the cell under column `column` in the row labelled `row`.
struct CellSel {
  std::string column;
  std::string row;
  friend bool operator==(const CellSel&, const CellSel&) = default;
};

struct StepRef {
  std::size_t index = 0;
  friend bool operator==(const StepRef&, const StepRef&) = default;
};

/// Literal number, cell, cell placeholder (`valK`), column (table_* only),
/// or an earlier step's result.
using ArithOperand = std::variant<Value, CellSel, ValuePlaceholder, ColumnSlot, StepRef>;

struct ArithStep {
  ArithOp op = ArithOp::Add;
  std::vector<ArithOperand> args;
  friend bool operator==(const ArithStep&, const ArithStep&) = default;
};

struct ArithExpr {
  std::vector<ArithStep> steps;
  friend bool operator==(const ArithExpr&, const ArithExpr&) = default;
};

// ---------------------------------------------------------------------------

struct Program {
  Family family = Family::Sql;
  std::variant<SqlQuery, LogicNode, ArithExpr> ast;

  const SqlQuery& sql() const { return std::get<SqlQuery>(ast); }
  const LogicNode& logic() const { return std::get<LogicNode>(ast); }
  const ArithExpr& arith() const { return std::get<ArithExpr>(ast); }

  bool has_placeholders() const;
  friend bool operator==(const Program&, const Program&) = default;
};

/// Parses an instantiated program. Every name is a concrete column or row.
Program parse_program(std::string_view text, Family family);

/// Grammar-valid text; parse_program(print_program(p)) == p for programs
/// without placeholders. Placeholders print as cK / cK_number / valK.
std::string print_program(const Program& p);

/// Column names referenced anywhere in the program (concrete only), in
/// first-occurrence order.
std::vector<std::string> referenced_columns(const Program& p);

}  // namespace tabsynth
