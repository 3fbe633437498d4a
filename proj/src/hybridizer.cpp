#include "tabsynth/hybridizer.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <iterator>

namespace tabsynth {

std::string verbalize_row(const Table& t, std::size_t row) {
  const std::size_t label = t.label_col();
  std::vector<std::string> pairs;
  for (std::size_t c = 0; c < t.num_cols(); ++c) {
    if (c == label || t.cell(row, c).is_empty()) continue;
    pairs.push_back(t.column_names()[c] + " of " + t.cell(row, c).surface());
  }
  const Value& name = t.cell(row, label);
  std::string s = name.is_empty() ? "This row" : name.surface();
  if (pairs.empty()) return s + " has no other values.";
  s += " has ";
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (i > 0) s += i + 1 == pairs.size() ? " and " : ", ";
    s += pairs[i];
  }
  return s + ".";
}

std::optional<SplitResult> table_to_text(const Table& t, const ExecResult& exec, Rng& rng, std::size_t min_sub_rows) {
  if (t.num_rows() < 2 || t.num_rows() - 1 < min_sub_rows) return std::nullopt;
  std::vector<CellRef> candidates;
  for (const CellRef& c : exec.highlighted) {
    if (c.row < t.num_rows()) candidates.push_back(c);
  }
  if (candidates.empty()) return std::nullopt;
  CellRef anchor = candidates[static_cast<std::size_t>(rng.uniform(candidates.size()))];

  SplitResult out{t, verbalize_row(t, anchor.row), anchor.row, t.rows()[anchor.row], anchor};
  for (const Value& v : out.removed_row) {
    if (!v.is_empty() && out.sentence.find(v.surface()) == std::string::npos) return std::nullopt;
  }
  std::vector<Row> rows = t.rows();
  rows.erase(rows.begin() + static_cast<std::ptrdiff_t>(anchor.row));
  out.sub_table = t.with_rows(t.id() + "#split", std::move(rows));
  return out;
}

std::vector<std::string> split_sentences(std::string_view paragraph) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    std::string s = trim(cur);
    if (!s.empty()) out.push_back(std::move(s));
    cur.clear();
  };
  for (std::size_t i = 0; i < paragraph.size(); ++i) {
    char c = paragraph[i];
    if (c == '\n' || c == '\r') {
      flush();
      continue;
    }
    cur += c;
    bool terminal = c == '.' || c == '!' || c == '?';
    if (terminal && (i + 1 == paragraph.size() || std::isspace(static_cast<unsigned char>(paragraph[i + 1])))) flush();
  }
  flush();
  return out;
}

namespace {

constexpr std::size_t kValueWindow = 6;
constexpr std::array<std::string_view, 8> kStopwords = {"The", "In", "On", "At", "During", "For", "A", "An"};

std::string strip_token(std::string_view tok) {
  static constexpr std::string_view kLead = "(\"";
  static constexpr std::string_view kTrail = ",.;:)!?\"";
  while (!tok.empty() && kLead.find(tok.front()) != std::string_view::npos) tok.remove_prefix(1);
  while (!tok.empty() && kTrail.find(tok.back()) != std::string_view::npos) tok.remove_suffix(1);
  return std::string(tok);
}

std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) {
      std::string tok = strip_token(s.substr(i, j - i));
      if (!tok.empty()) out.push_back(std::move(tok));
    }
    i = j;
  }
  return out;
}

bool capitalized(const std::string& tok) { return std::isupper(static_cast<unsigned char>(tok[0])) != 0; }

bool is_stopword(const std::string& tok) {
  return std::find(kStopwords.begin(), kStopwords.end(), tok) != kStopwords.end();
}

class RecordReader {
 public:
  explicit RecordReader(const Table& t) : t_(t) {
    for (std::size_t c = 0; c < t.num_cols(); ++c) {
      std::vector<std::string> toks;
      for (const auto& tok : tokenize(t.column_names()[c])) toks.push_back(to_lower(tok));
      column_tokens_.push_back(std::move(toks));
    }
    for (std::size_t r = 0; r < t.num_rows(); ++r) {
      label_tokens_ = std::max(label_tokens_, tokenize(t.cell(r, t.label_col()).surface()).size());
    }
    if (t.num_rows() == 0) label_tokens_ = SIZE_MAX;
  }

  std::optional<std::map<std::size_t, Value>> read(const std::string& sentence) const {
    std::vector<std::string> toks = tokenize(sentence);
    std::vector<std::string> lower;
    for (const auto& tok : toks) lower.push_back(to_lower(tok));
    std::vector<bool> consumed(toks.size(), false);
    std::vector<bool> name_token(toks.size(), false);
    std::map<std::size_t, Value> record;

    for (std::size_t c = 0; c < t_.num_cols(); ++c) {
      const auto& name = column_tokens_[c];
      if (name.empty()) continue;
      for (std::size_t i = 0; i + name.size() <= toks.size(); ++i) {
        if (!std::equal(name.begin(), name.end(), lower.begin() + static_cast<std::ptrdiff_t>(i))) continue;
        for (std::size_t k = i; k < i + name.size(); ++k) name_token[k] = true;
      }
    }

    const std::size_t label = t_.label_col();
    for (std::size_t c = 0; c < t_.num_cols(); ++c) {
      if (c == label || t_.column_type(c) == ColumnType::Textual) continue;
      const auto& name = column_tokens_[c];
      if (name.empty()) continue;
      for (std::size_t i = 0; i + name.size() <= toks.size() && !record.count(c); ++i) {
        if (!std::equal(name.begin(), name.end(), lower.begin() + static_cast<std::ptrdiff_t>(i))) continue;
        const std::size_t start = i + name.size();
        for (std::size_t k = start; k < std::min(toks.size(), start + kValueWindow); ++k) {
          if (consumed[k] || name_token[k]) continue;
          Value v = parse_value(toks[k]);
          if (!v.is_number()) continue;
          consumed[k] = true;
          record[c] = std::move(v);
          break;
        }
      }
    }
    if (record.empty()) return std::nullopt;

    std::optional<Value> row_label =
        t_.column_type(label) == ColumnType::Textual ? textual_label(toks, name_token) : numeric_label(toks, consumed, name_token);
    if (!row_label) return std::nullopt;
    record[label] = std::move(*row_label);
    return record;
  }

 private:
  bool existing_label(const Value& v) const {
    for (std::size_t r = 0; r < t_.num_rows(); ++r) {
      if (t_.cell(r, t_.label_col()) == v) return true;
    }
    return t_.find_row(v.surface()).has_value();
  }

  std::optional<Value> numeric_label(const std::vector<std::string>& toks, const std::vector<bool>& consumed,
                                     const std::vector<bool>& name_token) const {
    for (std::size_t k = 0; k < toks.size(); ++k) {
      if (consumed[k] || name_token[k]) continue;
      Value v = parse_value(toks[k]);
      if (v.is_number() && !existing_label(v)) return v;
    }
    return std::nullopt;
  }

  // Capitalized runs name the new row. A run opening the sentence is capitalized
  // regardless, so it is tried last, and loses its first word when it is longer
  // than every existing row label ("Newcomers Falcons" -> "Falcons").
  std::optional<Value> textual_label(const std::vector<std::string>& toks, const std::vector<bool>& name_token) const {
    std::optional<std::pair<std::size_t, std::size_t>> opening;
    std::size_t i = 0;
    while (i < toks.size()) {
      if (!capitalized(toks[i]) || name_token[i]) {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j < toks.size() && capitalized(toks[j]) && !name_token[j] && !parse_value(toks[j]).is_number()) ++j;
      std::size_t start = i;
      while (start < j && is_stopword(toks[start])) ++start;
      if (i == 0) {
        if (j - start > label_tokens_ && j - start > 1) ++start;
        if (start < j) opening = {start, j};
      } else if (auto v = run_label(toks, start, j)) {
        return v;
      }
      i = std::max(j, i + 1);
    }
    if (opening) return run_label(toks, opening->first, opening->second);
    return std::nullopt;
  }

  std::optional<Value> run_label(const std::vector<std::string>& toks, std::size_t start, std::size_t end) const {
    if (start >= end) return std::nullopt;
    std::string run;
    for (std::size_t k = start; k < end; ++k) run += (k > start ? " " : "") + toks[k];
    Value v = parse_value(run);
    if (v.is_text() && !existing_label(v)) return v;
    return std::nullopt;
  }

  const Table& t_;
  std::vector<std::vector<std::string>> column_tokens_;
  std::size_t label_tokens_ = 0;  // most words in an existing row label
};

}  // namespace

std::optional<ExpandResult> text_to_table(const Table& t, const Context& ctx) {
  if (t.num_cols() < 2) return std::nullopt;
  RecordReader reader(t);
  for (std::size_t p = 0; p < ctx.paragraphs.size(); ++p) {
    for (const std::string& sentence : split_sentences(ctx.paragraphs[p])) {
      auto record = reader.read(sentence);
      if (!record) continue;
      Row row(t.num_cols());
      ExpandResult out{t, p, sentence, {}};
      for (auto& [col, v] : *record) {
        out.extracted[t.column_names()[col]] = v;
        row[col] = std::move(v);
      }
      std::vector<Row> rows = t.rows();
      rows.push_back(std::move(row));
      out.expanded_table = t.with_rows(t.id() + "#expand", std::move(rows));
      return out;
    }
  }
  return std::nullopt;
}

}  // namespace tabsynth
