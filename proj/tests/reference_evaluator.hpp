#pragma once

// Brute-force evaluator used as a differential oracle. It shares the AST and
// table types with the library but none of the evaluation code: row sets are
// membership masks, orderings are computed by rank counting, and every
// operator is spelled out from its definition.

#include "tabsynth/error.hpp"
#include "tabsynth/executor.hpp"

#include <optional>
#include <set>
#include <vector>

namespace oracle {

struct Outcome {
  std::optional<tabsynth::ExecErrorKind> error;
  tabsynth::ExecResult::Kind kind = tabsynth::ExecResult::Kind::EmptySet;
  std::vector<tabsynth::Value> values;  // scalar: one entry; cells: all
  bool boolean = false;
  std::set<tabsynth::CellRef> highlighted;
  bool multi_row_hop = false;
};

Outcome evaluate(const tabsynth::Program& p, const tabsynth::Table& t);

/// Empty string when the executor agrees with the oracle, else a description
/// of the first difference.
std::string compare(const tabsynth::Program& p, const tabsynth::Table& t);

}  // namespace oracle
