#pragma once

#include "tabsynth/realizer.hpp"
#include "tabsynth/sampler.hpp"
#include "tabsynth/table.hpp"
#include "tabsynth/template.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

namespace tabsynth {

enum class Branch { TableOnly, Split, Expand };
const char* to_string(Branch b);

struct PipelineConfig {
  std::string tables_path;
  std::string contexts_path;  // optional
  std::string templates_path;
  std::string output_path;
  bool emit_qa = true;  // sql and arithmetic templates
  bool emit_fv = true;  // logical-form templates
  bool table_only = true;
  bool split = true;
  bool expand = true;
  /// Cap on emitted samples per branch per table.
  std::size_t samples_per_table = 20;
  std::size_t draws_per_template = 1;
  std::size_t min_sub_rows = 1;
  int jobs = 1;
  SamplerConfig sampler;
  std::optional<GeneratorEndpoint> generator;

  /// Relative paths resolve against `base_dir`. Throws ConfigError.
  static PipelineConfig from_json(const nlohmann::json& j, const std::string& base_dir);
  static PipelineConfig load(const std::string& path);
  void validate() const;
  bool enabled(Branch b) const;
};

struct CorpusStats {
  std::size_t samples = 0;
  std::size_t tables = 0;
  std::map<std::string, std::size_t> by_task;
  std::map<std::string, std::size_t> by_branch;
  std::map<std::string, std::size_t> by_family;
  std::map<std::string, std::size_t> by_template;
  std::map<std::string, std::size_t> by_label;
  std::map<std::string, std::size_t> by_answer_type;
  std::map<std::string, std::size_t> by_perturbation;
  std::map<std::string, std::size_t> discards;
  std::size_t duplicate_sentences = 0;
  std::unordered_set<std::string> sentences;  // not serialized

  double duplicate_rate() const { return samples ? static_cast<double>(duplicate_sentences) / static_cast<double>(samples) : 0.0; }
  /// Counts one emitted sample.
  void add(const nlohmann::ordered_json& sample);
  nlohmann::ordered_json to_json() const;
  std::string to_text() const;
};

struct GenerationResult {
  /// One serialized sample per entry, in output order.
  std::vector<std::string> lines;
  CorpusStats stats;
};

/// Runs every table through sampling, hybridization and realization. Output
/// order and content depend only on the inputs and the seed.
GenerationResult run_generation(const PipelineConfig& cfg, const std::vector<Table>& tables,
                                const std::map<std::string, Context>& contexts,
                                const std::vector<ProgramTemplate>& templates);

/// Loads the configured inputs, generates, and publishes the corpus and a
/// `<output>.stats.json` sidecar atomically. Throws ConfigError, IoError.
CorpusStats generate(const PipelineConfig& cfg);

struct Violation {
  std::size_t line = 0;
  std::string id;
  std::string kind;  // schema, answer, label, exec_error, fidelity, split, expand
  std::string detail;
};

struct ValidationReport {
  std::size_t samples = 0;
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

/// Checks one serialized sample; appends any violations.
void validate_sample(const std::string& line, std::size_t line_no, ValidationReport& report);
/// Re-executes every sample of a JSONL corpus. Throws IoError.
ValidationReport validate_corpus(const std::string& path);

/// Streams a corpus; merges discard counts from its stats sidecar if present.
/// Throws IoError.
CorpusStats corpus_stats(const std::string& path);

/// Writes `content` to a temporary sibling and renames it over `path`.
void write_atomically(const std::string& path, const std::string& content);

/// Rebuilds the table a split sample's program was executed on.
Table reconstruct_split_table(const Table& sub_table, const nlohmann::json& split, const std::string& original_id);

}  // namespace tabsynth
