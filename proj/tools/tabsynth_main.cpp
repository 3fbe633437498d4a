#include "tabsynth/error.hpp"
#include "tabsynth/executor.hpp"
#include "tabsynth/pipeline.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>

using namespace tabsynth;

namespace {

int run_generate(const std::string& config_path, std::optional<std::uint64_t> seed, std::optional<int> jobs,
                 const std::string& output) {
  PipelineConfig cfg = PipelineConfig::load(config_path);
  if (seed) cfg.sampler.seed = *seed;
  if (jobs) cfg.jobs = *jobs;
  if (!output.empty()) cfg.output_path = output;
  auto start = std::chrono::steady_clock::now();
  CorpusStats stats = generate(cfg);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::fprintf(stderr, "wrote %zu samples from %zu tables to %s in %.2fs\n", stats.samples, stats.tables,
               cfg.output_path.c_str(), secs);
  return 0;
}

int run_validate(const std::string& corpus) {
  ValidationReport report = validate_corpus(corpus);
  for (const auto& v : report.violations) {
    std::cout << "line " << v.line << " [" << (v.id.empty() ? "?" : v.id) << "] " << v.kind << ": " << v.detail << "\n";
  }
  std::cout << report.samples << " samples, " << report.violations.size() << " violations\n";
  return report.ok() ? 0 : 1;
}

int run_stats(const std::string& corpus, bool as_json) {
  CorpusStats stats = corpus_stats(corpus);
  if (as_json) std::cout << stats.to_json().dump(2) << "\n";
  else std::cout << stats.to_text();
  return 0;
}

int run_exec(const std::string& table_path, const std::string& program_text, const std::string& family_name) {
  auto family = family_from_string(family_name);
  if (!family) throw ConfigError("unknown family '" + family_name + "' (sql, logic, arith)");
  std::vector<Table> tables = load_table_file(table_path);
  if (tables.size() != 1) throw ConfigError(table_path + " holds " + std::to_string(tables.size()) + " tables, expected 1");
  Program p = parse_program(program_text, *family);
  ExecResult r = execute(p, tables.front());
  std::cout << exec_result_to_json(r).dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthesizes table question-answering and fact-verification samples."};
  app.require_subcommand(1);

  std::string config_path, output;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  auto* gen = app.add_subcommand("generate", "Generate a JSONL corpus from a config file");
  gen->add_option("--config", config_path, "Pipeline config (JSON)")->required()->check(CLI::ExistingFile);
  gen->add_option("--seed", seed, "Override the sampler seed");
  gen->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  gen->add_option("--output", output, "Override the output path");

  std::string corpus;
  auto* val = app.add_subcommand("validate", "Re-execute every sample of a corpus");
  val->add_option("corpus", corpus, "JSONL corpus")->required();

  bool as_json = false;
  auto* st = app.add_subcommand("stats", "Summarize a corpus");
  st->add_option("corpus", corpus, "JSONL corpus")->required();
  st->add_flag("--json", as_json, "Print JSON");

  std::string table_path, program_text, family_name;
  auto* ex = app.add_subcommand("exec", "Run one program against one table");
  ex->add_option("--table", table_path, "Table file (.csv or .json)")->required()->check(CLI::ExistingFile);
  ex->add_option("--program", program_text, "Program text")->required();
  ex->add_option("--family", family_name, "sql, logic or arith")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return run_generate(config_path, seed, jobs, output);
    if (*val) return run_validate(corpus);
    if (*st) return run_stats(corpus, as_json);
    if (*ex) return run_exec(table_path, program_text, family_name);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
