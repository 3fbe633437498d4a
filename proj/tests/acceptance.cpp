// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include "fixtures.hpp"
#include "generators.hpp"
#include "reference_evaluator.hpp"

#include "tabsynth/error.hpp"
#include "tabsynth/executor.hpp"
#include "tabsynth/pipeline.hpp"
#include "tabsynth/realizer.hpp"
#include "tabsynth/sampler.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using namespace tabsynth;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Tolerances and sizes.
constexpr int kOracleCasesPerFamily = 10'000;
constexpr double kOracleSeconds = 60.0;
constexpr std::size_t kMinFvSamples = 5'000;
constexpr int kLabelDraws = 10'000;
constexpr double kLabelLow = 0.48, kLabelHigh = 0.52;
constexpr int kValueDraws = 1'000;
constexpr double kValueLow = 0.20, kValueHigh = 0.30;
constexpr double kArithRelTol = 1e-9;
constexpr std::size_t kMinSplit = 1'000, kMinExpand = 200;
constexpr std::size_t kMinDeskSamples = 1'000;
constexpr double kDeskSeconds = 60.0;

int failures = 0;

void report(int ac, bool ok, const std::string& detail) {
  std::printf("AC%d %s  %s\n", ac, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fs::path work_dir() {
  fs::path d = fs::temp_directory_path() / "tabsynth_acceptance";
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<json> read_lines(const fs::path& p) {
  std::vector<json> out;
  std::ifstream in(p);
  for (std::string line; std::getline(in, line);) out.push_back(json::parse(line));
  return out;
}

json desk_config(const fs::path& out, std::size_t cap, std::size_t draws) {
  return json{{"tables", data_path("desk/tables")},
              {"contexts", data_path("desk/context.json")},
              {"templates", data_path("desk/templates.pack")},
              {"output", out.string()},
              {"samples_per_table", cap},
              {"draws_per_template", draws},
              {"sampler", {{"seed", 7}, {"max_attempts_per_template", 20}, {"label_ratio", 0.5}}}};
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---------------------------------------------------------------------------

void ac1_oracle() {
  auto t0 = std::chrono::steady_clock::now();
  std::string detail;
  int mismatches = 0;
  for (Family f : {Family::Sql, Family::Logic, Family::Arith}) {
    Rng rng(derive_seed(2024, to_string(f)));
    int bad = 0;
    for (int i = 0; i < kOracleCasesPerFamily; ++i) {
      Table t = gen::random_table(rng, 8, 4);
      Program p = gen::random_program(rng, t, f);
      std::string diff = oracle::compare(p, t);
      if (!diff.empty()) {
        if (bad == 0) std::fprintf(stderr, "AC1 mismatch: %s\n  %s\n", print_program(p).c_str(), diff.c_str());
        ++bad;
      }
    }
    mismatches += bad;
    detail += std::string(to_string(f)) + " " + std::to_string(kOracleCasesPerFamily) + " cases/" + std::to_string(bad) + " mismatches; ";
  }
  double secs = seconds_since(t0);
  report(1, mismatches == 0 && secs < kOracleSeconds, detail + fmt("%.1fs", secs));
}

void ac2_claim_closure(const fs::path& dir) {
  json j = desk_config(dir / "fv.jsonl", 40, 6);
  j["tasks"] = {"fv"};
  generate(PipelineConfig::from_json(j, "."));
  ValidationReport rep = validate_corpus((dir / "fv.jsonl").string());
  std::size_t supported = 0, refuted = 0, wrong = 0;
  for (const auto& s : read_lines(dir / "fv.jsonl")) {
    Program p = parse_program(s["provenance"]["program"].get<std::string>(), Family::Logic);
    Table t = load_table_json(s["table"]);
    // Split evidence is a sub-table; the claim was decided on the original.
    if (s["provenance"]["branch"] == "split") t = reconstruct_split_table(t, s["provenance"]["split"], s["provenance"]["table_id"]);
    bool truth = execute(p, t).boolean;
    bool sup = s["label"] == "Supported";
    (sup ? supported : refuted)++;
    if (truth != sup) ++wrong;
  }
  std::size_t n = supported + refuted;
  report(2, n >= kMinFvSamples && wrong == 0 && rep.ok(),
         std::to_string(n) + " fv samples (" + std::to_string(supported) + " Supported, " + std::to_string(refuted) +
             " Refuted); label mismatches " + std::to_string(wrong) + "; validate violations " + std::to_string(rep.violations.size()));
}

void ac3_sampler_stats() {
  auto pack = load_template_pack(data_path("desk/templates.pack"));
  auto tables = load_tables(data_path("desk/tables"));
  std::vector<const ProgramTemplate*> logic;
  for (const auto& t : pack) {
    if (t.body.family == Family::Logic) logic.push_back(&t);
  }
  SamplerConfig cfg;
  cfg.label_ratio = 0.5;
  Rng rng(derive_seed(2024, "labels"));
  int n = 0, supported = 0;
  for (std::size_t k = 0; n < kLabelDraws; ++k) {
    const ProgramTemplate& tpl = *logic[k % logic.size()];
    const Table& table = tables[(k / logic.size()) % tables.size()];
    SampleOutcome out;
    try {
      out = sample_program(tpl, table, cfg, rng);
    } catch (const NoEligibleColumns&) {
      continue;
    }
    if (!out.sample) continue;
    ++n;
    if (*out.sample->label == Label::Supported) ++supported;
  }
  double frac = static_cast<double>(supported) / n;
  bool labels_ok = frac >= kLabelLow && frac <= kLabelHigh;

  Table four = load_table("colour\nred\ngreen\nblue\nteal\n", TableFormat::Csv);
  ProgramTemplate tpl = parse_template("select count(c1) from w where c1 = val1", Family::Sql);
  std::map<std::string, int> counts;
  for (int i = 0; i < kValueDraws; ++i) counts[sample_binding(tpl, four, rng).values.at(1).value.text_value()]++;
  bool values_ok = counts.size() == 4;
  std::string freq;
  for (const auto& [v, c] : counts) {
    double f = static_cast<double>(c) / kValueDraws;
    values_ok = values_ok && f >= kValueLow && f <= kValueHigh;
    freq += v + "=" + fmt("%.3f", f) + " ";
  }
  report(3, labels_ok && values_ok,
         "Supported fraction " + fmt("%.4f", frac) + " over " + std::to_string(n) + " claims; value frequencies " + freq);
}

void ac4_example_templates(const fs::path& dir) {
  json j = {{"tables", data_path("toy/finance.json")},
            {"templates", data_path("templates/examples.pack")},
            {"output", (dir / "toy.jsonl").string()},
            {"branches", {"table_only"}},
            {"samples_per_table", 9},
            {"draws_per_template", 3},
            {"sampler", {{"seed", 11}}}};
  generate(PipelineConfig::from_json(j, "."));
  ValidationReport rep = validate_corpus((dir / "toy.jsonl").string());
  std::map<std::string, int> per_family;
  int arith_checked = 0, arith_bad = 0;
  std::string example;
  for (const auto& s : read_lines(dir / "toy.jsonl")) {
    per_family[s["provenance"]["family"]]++;
    if (s["provenance"]["family"] != "arith") continue;
    // (a - b) / b from the two bound cells, in floating point.
    const auto& vals = s["provenance"]["binding"]["values"];
    auto num = [](const json& v) {
      std::string surface = v["value"];
      surface.erase(std::remove(surface.begin(), surface.end(), ','), surface.end());
      return std::stod(surface);
    };
    double a = num(vals["val1"]), b = num(vals["val2"]);
    double expect = (a - b) / b;
    double got = std::stod(s["answer"].get<std::string>());
    ++arith_checked;
    if (std::fabs(got - expect) > kArithRelTol * std::max(1.0, std::fabs(expect))) ++arith_bad;
    if (example.empty()) {
      example = "e.g. \"" + s["sentence"].get<std::string>() + "\" -> " + s["answer"].get<std::string>() + " (hand: " +
                fmt("%.6g", expect) + ")";
    }
  }
  bool ok = rep.ok() && per_family["sql"] >= 1 && per_family["logic"] >= 1 && per_family["arith"] >= 1 && arith_checked > 0 &&
            arith_bad == 0;
  report(4, ok,
         "samples sql/logic/arith " + std::to_string(per_family["sql"]) + "/" + std::to_string(per_family["logic"]) + "/" +
             std::to_string(per_family["arith"]) + ", arith answers off " + std::to_string(arith_bad) + " of " +
             std::to_string(arith_checked) + "; " + example);
}

std::vector<std::string> row_multiset(const json& rows) {
  std::vector<std::string> out;
  for (const auto& r : rows) out.push_back(r.dump());
  std::sort(out.begin(), out.end());
  return out;
}

std::string strip_commas(std::string s) {
  s.erase(std::remove(s.begin(), s.end(), ','), s.end());
  return s;
}

void ac5_hybrid(const fs::path& dir) {
  json j = desk_config(dir / "hybrid.jsonl", 40, 4);
  j["branches"] = {"split", "expand"};
  generate(PipelineConfig::from_json(j, "."));
  std::map<std::string, json> originals;
  for (const auto& entry : fs::directory_iterator(data_path("desk/tables"))) {
    std::ifstream in(entry.path());
    json t = json::parse(in);
    originals[t["id"]] = t;
  }
  std::size_t splits = 0, split_bad = 0, expands = 0, expand_bad = 0;
  for (const auto& s : read_lines(dir / "hybrid.jsonl")) {
    const auto& prov = s["provenance"];
    if (prov["branch"] == "split") {
      ++splits;
      json rows = s["table"]["rows"];
      rows.push_back(prov["split"]["removed_row"]);
      if (row_multiset(rows) != row_multiset(originals.at(prov["table_id"])["rows"])) ++split_bad;
    } else if (prov["branch"] == "expand") {
      ++expands;
      const auto& ex = prov["expand"];
      std::string paragraph = strip_commas(s["paragraphs"][ex["source_paragraph_index"].get<std::size_t>()]);
      for (const auto& [col, v] : ex["extracted"].items()) {
        std::string surface = strip_commas(v.get<std::string>());
        bool numeric = !surface.empty() && surface.find_first_of("0123456789") != std::string::npos &&
                       surface.find_first_not_of("0123456789.$%-") == std::string::npos;
        if (numeric && paragraph.find(surface) == std::string::npos) ++expand_bad;
      }
    }
  }
  report(5, splits >= kMinSplit && split_bad == 0 && expands >= kMinExpand && expand_bad == 0,
         std::to_string(splits) + " split samples, " + std::to_string(split_bad) + " partition failures; " +
             std::to_string(expands) + " expand samples, " + std::to_string(expand_bad) + " ungrounded numbers");
}

void ac6_determinism(const fs::path& dir) {
  std::vector<std::string> outputs;
  for (int jobs : {1, 1, 8, 8}) {
    fs::path out = dir / ("det_" + std::to_string(outputs.size()) + ".jsonl");
    json j = desk_config(out, 12, 2);
    j["jobs"] = jobs;
    generate(PipelineConfig::from_json(j, "."));
    outputs.push_back(slurp(out));
  }
  bool same = !outputs[0].empty() && std::all_of(outputs.begin(), outputs.end(), [&](const auto& o) { return o == outputs[0]; });
  report(6, same, "jobs=1 x2 and jobs=8 x2: " + std::string(same ? "byte-identical" : "differ") + " (" +
                      std::to_string(outputs[0].size()) + " bytes)");
}

void ac7_throughput(const fs::path& dir, std::vector<fs::path>& corpora) {
  auto tables = load_tables(data_path("desk/tables"));
  auto pack = load_template_pack(data_path("desk/templates.pack"));
  fs::path out = dir / "desk.jsonl";
  auto t0 = std::chrono::steady_clock::now();
  CorpusStats stats = generate(PipelineConfig::from_json(desk_config(out, 12, 2), "."));
  double secs = seconds_since(t0);
  ValidationReport rep = validate_corpus(out.string());
  corpora.push_back(out);
  report(7, tables.size() == 50 && pack.size() == 30 && rep.ok() && rep.samples >= kMinDeskSamples && secs < kDeskSeconds,
         std::to_string(rep.samples) + " valid samples from " + std::to_string(tables.size()) + " tables x " +
             std::to_string(pack.size()) + " templates in " + fmt("%.2fs", secs) + " (" + std::to_string(stats.samples) +
             " written, " + std::to_string(rep.violations.size()) + " violations)");
}

void ac8_fidelity(const std::vector<fs::path>& corpora) {
  std::size_t total = 0, unfaithful = 0, fallback = 0;
  for (const auto& path : corpora) {
    for (const auto& s : read_lines(path)) {
      ++total;
      auto family = family_from_string(s["provenance"]["family"].get<std::string>());
      Program p = parse_program(s["provenance"]["program"].get<std::string>(), *family);
      const std::string sentence = s["sentence"];
      if (sentence == print_program(p)) ++fallback;
      if (!check_fidelity(sentence, p)) ++unfaithful;
    }
  }

  ProgramTemplate sql = parse_template("select c1 from w order by c2_number desc limit 1", Family::Sql);
  Binding b;
  b.columns[1] = "department";
  b.columns[2] = "total deputies";
  const std::string deputies = realize_rule(instantiate(sql, b)).text;

  Program pct = parse_program(
      "subtract(`2019` of `Stockholders' equity`, `2018` of `Stockholders' equity`), divide(#0, `2018` of `Stockholders' equity`)",
      Family::Arith);
  const std::string change = to_lower(realize_rule(pct).text);

  bool ok = total > 0 && unfaithful == 0 && deputies == "Which department has the most total deputies?" &&
            change == "what was the percentage change in stockholders' equity between 2018 and 2019?";
  report(8, ok,
         std::to_string(total - unfaithful) + "/" + std::to_string(total) + " samples pass the fidelity gate (" +
             std::to_string(fallback) + " printed-program fallbacks); rule path: \"" + deputies + "\" / \"" +
             realize_rule(pct).text + "\"");
}

}  // namespace

int main() {
  fs::path dir = work_dir();
  std::vector<fs::path> corpora;
  auto guard = [](int ac, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      report(ac, false, std::string("exception: ") + e.what());
    }
  };
  guard(1, [&] { ac1_oracle(); });
  guard(2, [&] {
    ac2_claim_closure(dir);
    corpora.push_back(dir / "fv.jsonl");
  });
  guard(3, [&] { ac3_sampler_stats(); });
  guard(4, [&] {
    ac4_example_templates(dir);
    corpora.push_back(dir / "toy.jsonl");
  });
  guard(5, [&] {
    ac5_hybrid(dir);
    corpora.push_back(dir / "hybrid.jsonl");
  });
  guard(6, [&] { ac6_determinism(dir); });
  guard(7, [&] { ac7_throughput(dir, corpora); });
  guard(8, [&] { ac8_fidelity(corpora); });
  std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
