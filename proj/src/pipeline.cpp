#include "tabsynth/pipeline.hpp"

#include "tabsynth/error.hpp"
#include "tabsynth/hybridizer.hpp"

#include <array>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <unistd.h>

namespace tabsynth {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

const char* to_string(Branch b) {
  switch (b) {
    case Branch::TableOnly: return "table_only";
    case Branch::Split: return "split";
    case Branch::Expand: return "expand";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Config

namespace {

template <class T>
T get_field(const json& j, const char* key, const char* what) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config field '") + key + "' must be " + what);
  }
}

std::string resolve(const std::string& base_dir, const std::string& p) {
  if (p.empty() || fs::path(p).is_absolute()) return p;
  return (fs::path(base_dir) / p).lexically_normal().string();
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const char* section) {
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ConfigError(std::string("unknown ") + section + " field '" + key + "'");
  }
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const json& j, const std::string& base_dir) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(j,
                 {"tables", "contexts", "templates", "output", "tasks", "branches", "samples_per_table",
                  "draws_per_template", "min_sub_rows", "jobs", "sampler", "generator"},
                 "config");
  PipelineConfig c;
  c.tables_path = resolve(base_dir, get_field<std::string>(j, "tables", "a path"));
  c.templates_path = resolve(base_dir, get_field<std::string>(j, "templates", "a path"));
  c.output_path = resolve(base_dir, get_field<std::string>(j, "output", "a path"));
  if (j.contains("contexts")) c.contexts_path = resolve(base_dir, get_field<std::string>(j, "contexts", "a path"));
  if (j.contains("tasks")) {
    auto tasks = get_field<std::vector<std::string>>(j, "tasks", "a list of \"qa\"/\"fv\"");
    c.emit_qa = c.emit_fv = false;
    for (const auto& t : tasks) {
      if (t == "qa") c.emit_qa = true;
      else if (t == "fv") c.emit_fv = true;
      else throw ConfigError("unknown task '" + t + "'");
    }
  }
  if (j.contains("branches")) {
    auto branches = get_field<std::vector<std::string>>(j, "branches", "a list of branch names");
    c.table_only = c.split = c.expand = false;
    for (const auto& b : branches) {
      if (b == "table_only") c.table_only = true;
      else if (b == "split") c.split = true;
      else if (b == "expand") c.expand = true;
      else throw ConfigError("unknown branch '" + b + "'");
    }
  }
  if (j.contains("samples_per_table")) c.samples_per_table = get_field<std::size_t>(j, "samples_per_table", "a positive integer");
  if (j.contains("draws_per_template")) c.draws_per_template = get_field<std::size_t>(j, "draws_per_template", "a positive integer");
  if (j.contains("min_sub_rows")) c.min_sub_rows = get_field<std::size_t>(j, "min_sub_rows", "a non-negative integer");
  if (j.contains("jobs")) c.jobs = get_field<int>(j, "jobs", "a positive integer");
  if (j.contains("sampler")) {
    const json& s = j["sampler"];
    if (!s.is_object()) throw ConfigError("config field 'sampler' must be an object");
    reject_unknown(s, {"seed", "max_attempts_per_template", "label_ratio"}, "sampler");
    if (s.contains("seed")) c.sampler.seed = get_field<std::uint64_t>(s, "seed", "an unsigned integer");
    if (s.contains("max_attempts_per_template")) {
      c.sampler.max_attempts_per_template = get_field<int>(s, "max_attempts_per_template", "a positive integer");
    }
    if (s.contains("label_ratio")) c.sampler.label_ratio = get_field<double>(s, "label_ratio", "a number");
  }
  if (j.contains("generator") && !j["generator"].is_null()) {
    const json& g = j["generator"];
    if (!g.is_object()) throw ConfigError("config field 'generator' must be an object");
    reject_unknown(g, {"transport", "address", "timeout_ms", "max_in_flight"}, "generator");
    GeneratorEndpoint ep;
    std::string transport = g.contains("transport") ? get_field<std::string>(g, "transport", "a string") : "subprocess";
    if (transport == "subprocess") ep.transport = GeneratorEndpoint::Transport::Subprocess;
    else if (transport == "http") ep.transport = GeneratorEndpoint::Transport::Http;
    else throw ConfigError("unknown generator transport '" + transport + "'");
    ep.address = get_field<std::string>(g, "address", "a string");
    if (g.contains("timeout_ms")) ep.timeout_ms = get_field<int>(g, "timeout_ms", "a positive integer");
    if (g.contains("max_in_flight")) ep.max_in_flight = get_field<int>(g, "max_in_flight", "a positive integer");
    c.generator = ep;
  }
  c.validate();
  return c;
}

PipelineConfig PipelineConfig::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path + " is not valid JSON: " + e.what());
  }
  return from_json(j, fs::path(path).parent_path().string());
}

void PipelineConfig::validate() const {
  if (!table_only && !split && !expand) throw ConfigError("at least one branch must be enabled");
  if (!emit_qa && !emit_fv) throw ConfigError("at least one task must be enabled");
  if (samples_per_table < 1) throw ConfigError("samples_per_table must be at least 1");
  if (draws_per_template < 1) throw ConfigError("draws_per_template must be at least 1");
  if (jobs < 1) throw ConfigError("jobs must be at least 1");
  sampler.validate();
  if (generator) generator->validate();
}

bool PipelineConfig::enabled(Branch b) const {
  switch (b) {
    case Branch::TableOnly: return table_only;
    case Branch::Split: return split;
    case Branch::Expand: return expand;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Stats

void CorpusStats::add(const ordered_json& s) {
  ++samples;
  const std::string task = s.value("task", "");
  ++by_task[task];
  const auto& prov = s.contains("provenance") ? s["provenance"] : ordered_json::object();
  ++by_branch[prov.value("branch", "")];
  ++by_family[prov.value("family", "")];
  ++by_template[prov.value("template", "")];
  if (task == "fv") {
    ++by_label[s.value("label", "")];
    ++by_answer_type["label"];
    ++by_perturbation[prov.value("perturbation", "")];
  } else if (s.contains("answer")) {
    const auto& a = s["answer"];
    if (a.is_array()) ++by_answer_type["list"];
    else if (a.is_string() && parse_value(a.get<std::string>()).is_number()) ++by_answer_type["number"];
    else ++by_answer_type["text"];
  }
  if (!sentences.insert(s.value("sentence", "")).second) ++duplicate_sentences;
}

ordered_json CorpusStats::to_json() const {
  ordered_json j;
  j["samples"] = samples;
  j["tables"] = tables;
  j["by_task"] = by_task;
  j["by_branch"] = by_branch;
  j["by_family"] = by_family;
  j["by_label"] = by_label;
  j["by_answer_type"] = by_answer_type;
  j["by_perturbation"] = by_perturbation;
  j["by_template"] = by_template;
  j["discards"] = discards;
  j["duplicate_sentences"] = duplicate_sentences;
  j["duplicate_rate"] = duplicate_rate();
  return j;
}

std::string CorpusStats::to_text() const {
  std::ostringstream out;
  out << "samples: " << samples << "\n";
  if (tables) out << "tables: " << tables << "\n";
  auto section = [&](const char* name, const std::map<std::string, std::size_t>& m) {
    if (m.empty()) return;
    out << name << ":\n";
    for (const auto& [k, v] : m) out << "  " << (k.empty() ? "(none)" : k) << ": " << v << "\n";
  };
  section("task", by_task);
  section("branch", by_branch);
  section("family", by_family);
  section("label", by_label);
  section("answer type", by_answer_type);
  section("perturbation", by_perturbation);
  section("template", by_template);
  section("discards", discards);
  char rate[32];
  std::snprintf(rate, sizeof rate, "%.4f", duplicate_rate());
  out << "duplicate sentences: " << duplicate_sentences << " (rate " << rate << ")\n";
  if (auto it = by_label.find("Supported"); it != by_label.end() && by_task.count("fv")) {
    std::snprintf(rate, sizeof rate, "%.4f", static_cast<double>(it->second) / static_cast<double>(by_task.at("fv")));
    out << "supported fraction: " << rate << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Generation

namespace {

ordered_json table_json(const Table& t) {
  ordered_json j;
  j["id"] = t.id();
  j["header"] = t.column_names();
  ordered_json rows = ordered_json::array();
  for (const Row& row : t.rows()) {
    ordered_json r = ordered_json::array();
    for (const Value& v : row) r.push_back(v.surface());
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  if (t.label_col() != 0) j["label_col"] = t.label_col();
  return j;
}

ordered_json row_json(const Row& row) {
  ordered_json r = ordered_json::array();
  for (const Value& v : row) r.push_back(v.surface());
  return r;
}

ordered_json binding_json(const Binding& b) {
  ordered_json cols = ordered_json::object();
  for (const auto& [k, name] : b.columns) cols["c" + std::to_string(k)] = name;
  ordered_json vals = ordered_json::object();
  for (const auto& [k, bv] : b.values) {
    ordered_json v;
    v["value"] = bv.value.surface();
    v["column"] = bv.column;
    v["cell"] = {bv.cell.row, bv.cell.col};
    if (!bv.row_label.empty()) v["row_label"] = bv.row_label;
    vals["val" + std::to_string(k)] = std::move(v);
  }
  ordered_json j;
  j["columns"] = std::move(cols);
  j["values"] = std::move(vals);
  return j;
}

ordered_json highlighted_json(const ExecResult& r) {
  ordered_json cells = ordered_json::array();
  for (const CellRef& c : r.highlighted) cells.push_back({c.row, c.col});
  return cells;
}

struct TableOutput {
  std::vector<ordered_json> samples;
  std::map<std::string, std::size_t> discards;
};

class TableWorker {
 public:
  TableWorker(const PipelineConfig& cfg, const std::vector<ProgramTemplate>& templates, ExternalGenerator* gen)
      : cfg_(cfg), templates_(templates), gen_(gen) {}

  TableOutput run(const Table& table, const Context* ctx) {
    out_ = {};
    counts_ = {};
    table_ = &table;
    const std::uint64_t seed = cfg_.sampler.seed;

    std::optional<ExpandResult> expansion;
    if (cfg_.expand) {
      if (ctx) expansion = text_to_table(table, *ctx);
      if (!expansion) ++out_.discards[ctx ? "expand_no_record" : "expand_no_context"];
    }

    for (std::size_t ti : template_order(derive_seed(seed, table.id(), {0}))) {
      if (all_full(expansion.has_value())) break;
      const ProgramTemplate& tpl = templates_[ti];
      const bool fv = tpl.body.family == Family::Logic;
      if (fv ? !cfg_.emit_fv : !cfg_.emit_qa) continue;
      for (std::size_t draw = 0; draw < cfg_.draws_per_template; ++draw) {
        if (room(Branch::TableOnly) || room(Branch::Split)) {
          Rng rng(derive_seed(seed, table.id(), {1, ti, draw}));
          if (auto s = sample(tpl, table, rng)) {
            if (room(Branch::TableOnly)) emit(Branch::TableOnly, tpl, *s, table, {}, ordered_json());
            if (room(Branch::Split)) {
              Rng split_rng(derive_seed(seed, table.id(), {2, ti, draw}));
              if (auto split = table_to_text(table, s->program.result, split_rng, cfg_.min_sub_rows)) {
                ordered_json info;
                info["removed_row_index"] = split->removed_row_index;
                info["removed_row"] = row_json(split->removed_row);
                info["anchor"] = {split->anchor_cell.row, split->anchor_cell.col};
                info["row_sentence"] = split->sentence;
                emit(Branch::Split, tpl, *s, split->sub_table, {split->sentence}, std::move(info));
              } else {
                ++out_.discards["split_unavailable"];
              }
            }
          }
        }
        if (expansion && room(Branch::Expand)) {
          Rng rng(derive_seed(seed, table.id(), {3, ti, draw}));
          const Table& expanded = expansion->expanded_table;
          if (auto s = sample(tpl, expanded, rng)) {
            ordered_json info;
            info["source_paragraph_index"] = expansion->source_paragraph_index;
            info["source_sentence"] = expansion->source_sentence;
            ordered_json extracted = ordered_json::object();
            for (const auto& [col, v] : expansion->extracted) extracted[col] = v.surface();
            info["extracted"] = std::move(extracted);
            bool touches = false;
            for (const CellRef& c : s->program.result.highlighted) touches = touches || c.row + 1 == expanded.num_rows();
            info["reads_new_row"] = touches;
            emit(Branch::Expand, tpl, *s, expanded, ctx->paragraphs, std::move(info));
          }
        }
      }
    }
    return std::move(out_);
  }

 private:
  struct Realized {
    SampledProgram program;
    Realization text;
  };

  std::optional<Realized> sample(const ProgramTemplate& tpl, const Table& t, Rng& rng) {
    SampleOutcome outcome = sample_program(tpl, t, cfg_.sampler, rng);
    for (const auto& [reason, n] : outcome.failures) out_.discards[reason] += static_cast<std::size_t>(n);
    if (!outcome.sample) {
      ++out_.discards["template_exhausted"];
      return std::nullopt;
    }
    Realization text = gen_ ? realize_external(outcome.sample->program, *gen_) : realize_rule(outcome.sample->program);
    if (!text.fidelity_ok) {
      ++out_.discards["fidelity"];
      return std::nullopt;
    }
    return Realized{std::move(*outcome.sample), std::move(text)};
  }

  std::vector<std::size_t> template_order(std::uint64_t stream) const {
    Rng rng(stream);
    std::vector<std::size_t> left(templates_.size());
    for (std::size_t i = 0; i < left.size(); ++i) left[i] = i;
    std::vector<std::size_t> order;
    while (!left.empty()) {
      std::vector<double> w;
      for (std::size_t i : left) w.push_back(templates_[i].weight);
      std::size_t k = rng.weighted(w);
      order.push_back(left[k]);
      left.erase(left.begin() + static_cast<std::ptrdiff_t>(k));
    }
    return order;
  }

  bool room(Branch b) const { return cfg_.enabled(b) && counts_[static_cast<int>(b)] < cfg_.samples_per_table; }

  bool all_full(bool expandable) const {
    return !room(Branch::TableOnly) && !room(Branch::Split) && (!expandable || !room(Branch::Expand));
  }

  void emit(Branch b, const ProgramTemplate& tpl, const Realized& r, const Table& evidence, std::vector<std::string> paragraphs,
            ordered_json branch_info) {
    std::size_t n = counts_[static_cast<int>(b)]++;
    const SampledProgram& sp = r.program;
    const bool fv = sp.label.has_value();
    ordered_json s;
    s["id"] = table_->id() + "/" + to_string(b) + "/" + std::to_string(n);
    s["task"] = fv ? "fv" : "qa";
    s["sentence"] = r.text.text;
    s["table"] = table_json(evidence);
    s["paragraphs"] = std::move(paragraphs);
    if (fv) s["label"] = to_string(*sp.label);
    else s["answer"] = ordered_json::parse(answer_to_json(sp.result).dump());

    ordered_json prov;
    prov["template"] = tpl.canonical_key;
    prov["family"] = to_string(sp.program.family);
    prov["program"] = print_program(sp.program);
    prov["binding"] = binding_json(sp.binding);
    prov["highlighted"] = highlighted_json(sp.result);
    prov["branch"] = to_string(b);
    prov["table_id"] = table_->id();
    prov["realizer"] = to_string(r.text.source);
    prov["seed"] = cfg_.sampler.seed;
    prov["multi_row_hop"] = sp.result.multi_row_hop;
    if (fv) prov["perturbation"] = sp.perturbation;
    if (b == Branch::Split) prov["split"] = std::move(branch_info);
    if (b == Branch::Expand) prov["expand"] = std::move(branch_info);
    prov["debug"] = ordered_json::parse(exec_result_to_json(sp.result).dump());
    s["provenance"] = std::move(prov);
    out_.samples.push_back(std::move(s));
  }

  const PipelineConfig& cfg_;
  const std::vector<ProgramTemplate>& templates_;
  ExternalGenerator* gen_;
  const Table* table_ = nullptr;
  TableOutput out_;
  std::array<std::size_t, 3> counts_{};
};

}  // namespace

GenerationResult run_generation(const PipelineConfig& cfg, const std::vector<Table>& tables,
                                const std::map<std::string, Context>& contexts,
                                const std::vector<ProgramTemplate>& templates) {
  cfg.validate();
  std::vector<const Table*> order;
  for (const Table& t : tables) order.push_back(&t);
  std::stable_sort(order.begin(), order.end(), [](const Table* a, const Table* b) { return a->id() < b->id(); });

  std::unique_ptr<ExternalGenerator> gen;
  if (cfg.generator) gen = std::make_unique<ExternalGenerator>(*cfg.generator);

  std::vector<TableOutput> outputs(order.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto work = [&] {
    TableWorker worker(cfg, templates, gen.get());
    for (std::size_t i = next++; i < order.size(); i = next++) {
      try {
        auto it = contexts.find(order[i]->id());
        outputs[i] = worker.run(*order[i], it == contexts.end() ? nullptr : &it->second);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t jobs = std::min<std::size_t>(static_cast<std::size_t>(cfg.jobs), std::max<std::size_t>(order.size(), 1));
  if (jobs <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < jobs; ++k) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  GenerationResult result;
  result.stats.tables = order.size();
  for (auto& out : outputs) {
    for (auto& s : out.samples) {
      result.stats.add(s);
      result.lines.push_back(s.dump());
    }
    for (const auto& [k, v] : out.discards) result.stats.discards[k] += v;
  }
  return result;
}

void write_atomically(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp." + std::to_string(getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::remove(tmp.c_str());
      throw IoError("write failed for " + tmp);
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    std::remove(tmp.c_str());
    throw IoError("cannot publish " + path + ": " + ec.message());
  }
}

CorpusStats generate(const PipelineConfig& cfg) {
  cfg.validate();
  std::vector<Table> tables = load_tables(cfg.tables_path);
  std::map<std::string, Context> contexts;
  if (!cfg.contexts_path.empty()) contexts = load_contexts(cfg.contexts_path);
  std::vector<ProgramTemplate> templates = dedupe_templates(load_template_pack(cfg.templates_path));
  GenerationResult r = run_generation(cfg, tables, contexts, templates);

  std::string body;
  for (const auto& line : r.lines) body += line + "\n";
  if (auto parent = fs::path(cfg.output_path).parent_path(); !parent.empty()) fs::create_directories(parent);
  write_atomically(cfg.output_path, body);
  write_atomically(cfg.output_path + ".stats.json", r.stats.to_json().dump(2) + "\n");
  return r.stats;
}

// ---------------------------------------------------------------------------
// Validation

Table reconstruct_split_table(const Table& sub_table, const json& split, const std::string& original_id) {
  std::size_t index = split.at("removed_row_index").get<std::size_t>();
  Row removed;
  for (const auto& cell : split.at("removed_row")) removed.push_back(parse_value(cell.get<std::string>()));
  if (removed.size() != sub_table.num_cols()) throw MalformedInput("removed row has the wrong width");
  std::vector<Row> rows = sub_table.rows();
  if (index > rows.size()) throw MalformedInput("removed row index out of range");
  rows.insert(rows.begin() + static_cast<std::ptrdiff_t>(index), std::move(removed));
  return Table(original_id, sub_table.column_names(), std::move(rows), sub_table.label_col());
}

void validate_sample(const std::string& line, std::size_t line_no, ValidationReport& report) {
  ++report.samples;
  std::string id;
  auto violation = [&](const char* kind, const std::string& detail) { report.violations.push_back({line_no, id, kind, detail}); };
  json s;
  try {
    s = json::parse(line);
  } catch (const json::exception& e) {
    violation("schema", std::string("not JSON: ") + e.what());
    return;
  }
  try {
    if (!s.is_object()) throw MalformedInput("sample is not an object");
    id = s.at("id").get<std::string>();
    const std::string task = s.at("task").get<std::string>();
    const std::string sentence = s.at("sentence").get<std::string>();
    if (trim(sentence).empty()) throw MalformedInput("blank sentence");
    const auto paragraphs = s.at("paragraphs").get<std::vector<std::string>>();
    const json& prov = s.at("provenance");
    const std::string branch = prov.at("branch").get<std::string>();
    auto family = family_from_string(prov.at("family").get<std::string>());
    if (!family) throw MalformedInput("unknown family");
    if ((task == "fv") != (*family == Family::Logic) || (task != "fv" && task != "qa")) {
      throw MalformedInput("task '" + task + "' does not match the program family");
    }
    const std::string printed = prov.at("program").get<std::string>();
    prov.at("template").get<std::string>();
    prov.at("realizer").get<std::string>();

    Table evidence = load_table_json(s.at("table"));
    Table context = evidence;
    if (branch == "split") {
      const json& split = prov.at("split");
      context = reconstruct_split_table(evidence, split, prov.at("table_id").get<std::string>());
      const std::string row_sentence = split.at("row_sentence").get<std::string>();
      if (paragraphs.size() != 1 || paragraphs[0] != row_sentence) violation("split", "paragraphs must hold the row sentence");
      for (const auto& cell : split.at("removed_row")) {
        const std::string surface = cell.get<std::string>();
        if (!surface.empty() && row_sentence.find(surface) == std::string::npos) {
          violation("split", "row sentence omits '" + surface + "'");
        }
      }
    } else if (branch == "expand") {
      const json& expand = prov.at("expand");
      std::size_t p = expand.at("source_paragraph_index").get<std::size_t>();
      if (p >= paragraphs.size()) {
        violation("expand", "source paragraph index out of range");
      } else {
        for (const auto& [col, v] : expand.at("extracted").items()) {
          const std::string surface = v.get<std::string>();
          if (parse_value(surface).is_number() && paragraphs[p].find(surface) == std::string::npos) {
            violation("expand", "extracted '" + surface + "' for " + col + " is not in the paragraph");
          }
        }
      }
    } else if (branch != "table_only") {
      throw MalformedInput("unknown branch '" + branch + "'");
    }

    Program program = parse_program(printed, *family);
    if (sentence != printed && !check_fidelity(sentence, program)) violation("fidelity", "sentence drops a program span");
    try {
      ExecResult r = execute(program, context);
      if (task == "fv") {
        auto label = label_from_string(s.at("label").get<std::string>());
        if (!label) throw MalformedInput("unknown label");
        if (r.kind != ExecResult::Kind::Bool || r.boolean != (*label == Label::Supported)) {
          violation("label", std::string("claim evaluates to ") + (r.boolean ? "true" : "false"));
        }
      } else {
        json expected = answer_to_json(r);
        if (expected != s.at("answer")) violation("answer", "expected " + expected.dump() + ", stored " + s.at("answer").dump());
      }
    } catch (const ExecError& e) {
      violation("exec_error", e.what());
    }
  } catch (const ParseError& e) {
    violation("schema", std::string("program does not parse: ") + e.what());
  } catch (const json::exception& e) {
    violation("schema", e.what());
  } catch (const MalformedInput& e) {
    violation("schema", e.what());
  }
}

ValidationReport validate_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus " + path);
  ValidationReport report;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    validate_sample(line, line_no, report);
  }
  return report;
}

CorpusStats corpus_stats(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus " + path);
  CorpusStats stats;
  std::set<std::string> tables;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ordered_json s;
    try {
      s = ordered_json::parse(line);
      stats.add(s);
      tables.insert(s.at("provenance").at("table_id").get<std::string>());
    } catch (const ordered_json::exception& e) {
      throw IoError("corpus line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  stats.tables = tables.size();
  std::ifstream side(path + ".stats.json", std::ios::binary);
  if (side) {
    try {
      json j = json::parse(side);
      if (j.contains("discards")) stats.discards = j["discards"].get<std::map<std::string, std::size_t>>();
    } catch (const json::exception&) {
      // A broken sidecar only loses the discard histogram.
    }
  }
  return stats;
}

}  // namespace tabsynth
