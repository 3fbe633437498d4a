#pragma once

#include "tabsynth/executor.hpp"
#include "tabsynth/rng.hpp"
#include "tabsynth/template.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>

namespace tabsynth {

struct SamplerConfig {
  std::uint64_t seed = 0;
  int max_attempts_per_template = 20;
  /// Fraction of logical-form claims drawn as Supported.
  double label_ratio = 0.5;

  /// Throws ConfigError.
  void validate() const;
};

/// A value placeholder's draw and the cell it came from.
struct BoundValue {
  Value value;
  CellRef cell;
  std::string column;
  std::string row_label;  // Cell role only
};

struct Binding {
  std::map<int, std::string> columns;
  std::map<int, BoundValue> values;
};

/// Draws columns for every column placeholder and cells for every
/// column-value or cell placeholder. Claim placeholders stay open.
/// Throws NoEligibleColumns when the table can never satisfy the template,
/// NoEligibleValues when this particular column draw has no usable cell.
Binding sample_binding(const ProgramTemplate& t, const Table& table, Rng& rng);

/// Substitutes the binding. Claim placeholders of logical forms are left in
/// place for decide_claim_arg. Throws IncompleteBinding.
Program instantiate(const ProgramTemplate& t, const Binding& b);

/// The literal a value becomes once printed and parsed back.
Value literal_form(const Value& v);

enum class Label { Supported, Refuted };
const char* to_string(Label l);
std::optional<Label> label_from_string(std::string_view s);

struct ClaimDecision {
  Program program;
  Label label = Label::Supported;
  /// exact, offset_1, offset_10pct, offset_25pct, column_value or fixed.
  std::string perturbation;
};

/// Closes the open second argument of the root comparison (or of each
/// comparison in a root-level `and` chain) so the claim evaluates to the
/// target label. Throws CannotPerturb or ExecError.
ClaimDecision decide_claim_arg(const Program& p, const Table& table, Label target, Rng& rng);

struct SampledProgram {
  Program program;
  Binding binding;
  ExecResult result;
  std::optional<Label> label;
  std::string perturbation;
};

struct SampleOutcome {
  std::optional<SampledProgram> sample;
  int attempts = 0;
  /// Discard reason -> count, one entry per failed attempt.
  std::map<std::string, int> failures;
};

/// Draw, instantiate, execute; retries empty or failing draws up to the
/// configured budget.
SampleOutcome sample_program(const ProgramTemplate& t, const Table& table, const SamplerConfig& cfg, Rng& rng);

}  // namespace tabsynth
