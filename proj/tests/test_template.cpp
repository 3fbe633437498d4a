#include "fixtures.hpp"
#include "generators.hpp"

#include "tabsynth/error.hpp"
#include "tabsynth/template.hpp"

#include <doctest.h>

#include <algorithm>
#include <map>

using namespace tabsynth;

TEST_CASE("superlative sql template") {
  ProgramTemplate t = parse_template("select c1 from w order by c2_number desc limit 1", Family::Sql);
  REQUIRE(t.columns.size() == 2);
  CHECK(t.columns[0].index == 1);
  CHECK(t.columns[0].type == SlotType::Any);
  CHECK(t.columns[1].index == 2);
  CHECK(t.columns[1].type == SlotType::Number);
  CHECK(t.values.empty());
}

TEST_CASE("hop claim template binds values to columns") {
  ProgramTemplate t = parse_template("eq { hop { filter_eq { all_rows ; c1 ; val1 } ; c2 } ; val2 }", Family::Logic);
  REQUIRE(t.values.size() == 2);
  const auto* v1 = t.value_info(1);
  const auto* v2 = t.value_info(2);
  REQUIRE(v1);
  REQUIRE(v2);
  CHECK(v1->role == ValuePlaceholderInfo::Role::ColumnValue);
  CHECK(std::get<ColumnPlaceholder>(*v1->column).index == 1);
  CHECK(v2->role == ValuePlaceholderInfo::Role::Claim);
}

TEST_CASE("percentage change arith template") {
  ProgramTemplate t = parse_template("subtract( val1 , val2 ), divide( #0 , val2 )", Family::Arith);
  const ArithExpr& e = t.body.arith();
  REQUIRE(e.steps.size() == 2);
  CHECK(std::get<StepRef>(e.steps[1].args[0]).index == 0);
  CHECK(t.value_info(1)->role == ValuePlaceholderInfo::Role::Cell);
  CHECK(t.value_info(2)->role == ValuePlaceholderInfo::Role::Cell);
}

TEST_CASE("numeric-only slots type their column placeholder") {
  CHECK(parse_template("eq { hop { argmax { all_rows ; c1 } ; c2 } ; val1 }", Family::Logic).column_info(1)->type == SlotType::Number);
  CHECK(parse_template("table_average(c1, none)", Family::Arith).column_info(1)->type == SlotType::Number);
  CHECK(parse_template("select sum(c1) from w", Family::Sql).column_info(1)->type == SlotType::Number);
  CHECK(parse_template("select count(c1) from w", Family::Sql).column_info(1)->type == SlotType::Any);
}

TEST_CASE("template errors") {
  CHECK_THROWS_AS(parse_template("eq { count { all_rows } ; val1 ; val2 }", Family::Logic), ArityError);
  CHECK_THROWS_AS(parse_template("select c1 from w where c2 = val1 and c3 = val1", Family::Sql), DanglingValue);
  CHECK_THROWS_AS(parse_template("select c1 from w order", Family::Sql), ParseError);
}

TEST_CASE("canonicalize examples") {
  auto key = [](const char* s, Family f) { return parse_template(s, f).canonical_key; };
  CHECK(key("select c3 from w where c1 = val2", Family::Sql) == key("select c1 from w where c2 = val1", Family::Sql));
  CHECK(key("eq{count{all_rows};val1}", Family::Logic) == key("eq { count { all_rows } ; val1 }", Family::Logic));
  CHECK(key("eq { count { all_rows } ; val1 }", Family::Logic) != key("greater { count { all_rows } ; val1 }", Family::Logic));
  CHECK(key("select c1 from w", Family::Sql) != key("select c1_number from w", Family::Sql));
}

TEST_CASE("dedupe examples") {
  auto a = parse_template("select c1 from w where c2 = val1", Family::Sql);
  auto a2 = parse_template("select c2 from w where c1 = val1", Family::Sql);
  auto b = parse_template("select count(c1) from w", Family::Sql);
  auto out = dedupe_templates({a, a2, b});
  REQUIRE(out.size() == 2);
  CHECK(out[0].canonical_key == a.canonical_key);
  CHECK(out[1].canonical_key == b.canonical_key);
  CHECK(dedupe_templates({}).empty());
}

TEST_CASE("pack parsing") {
  auto pack = parse_template_pack("# comment\n\nsql|select c1 from w\nlogic*2.5|eq { count { all_rows } ; val1 }\n");
  REQUIRE(pack.size() == 2);
  CHECK(pack[1].weight == 2.5);
  CHECK_THROWS_AS(parse_template_pack("sql select c1 from w\n"), ConfigError);
  CHECK_THROWS_AS(parse_template_pack("cobol|select c1 from w\n"), ConfigError);
  CHECK_THROWS_AS(parse_template_pack("sql*0|select c1 from w\n"), ConfigError);
  try {
    parse_template_pack("sql|select c1 from w\nlogic|eq { oops }\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("shipped packs parse and keep every template") {
  auto examples = load_template_pack(data_path("templates/examples.pack"));
  CHECK(examples.size() == 3);
  CHECK(dedupe_templates(examples).size() == 3);
  auto desk = load_template_pack(data_path("desk/templates.pack"));
  CHECK(desk.size() == 30);
  CHECK(dedupe_templates(desk).size() == 30);
}

namespace {

// A structural template text with placeholder indices chosen by `perm`.
// `variant` 0..3 adds or changes a limit so each (shape, variant) is distinct.
std::string shape_text(int shape, const std::vector<int>& perm, int variant = 0) {
  auto c = [&](int i) { return "c" + std::to_string(perm[static_cast<std::size_t>(i)]); };
  auto v = [&](int i) { return "val" + std::to_string(perm[static_cast<std::size_t>(i)]); };
  std::string lim = variant ? " limit " + std::to_string(variant) : "";
  switch (shape % 10) {
    case 0: return "select " + c(0) + " from w where " + c(1) + " = " + v(0) + lim;
    case 1: return "select " + c(0) + " from w where " + c(1) + " = " + v(0) + " and " + c(2) + " = " + v(1) + lim;
    case 2: return "select count(" + c(0) + ") from w where " + c(1) + " = " + v(0) + lim;
    case 3: return "select " + c(0) + "_number - " + c(1) + "_number from w where " + c(2) + " = " + v(0) + lim;
    case 4: return "select " + c(0) + " from w order by " + c(1) + "_number desc limit " + std::to_string(variant + 1);
    case 5: return "select " + c(0) + " from w order by " + c(1) + "_number asc limit " + std::to_string(variant + 1);
    case 6: return "select max(" + c(0) + ") from w where " + c(1) + " = " + v(0) + lim;
    case 7: return "select min(" + c(0) + ") from w where " + c(1) + " = " + v(0) + lim;
    case 8: return "select " + c(0) + " from w where " + c(1) + " > " + v(0) + lim;
    default: return "select " + c(0) + " from w where " + c(1) + " < " + v(0) + lim;
  }
}

}  // namespace

TEST_CASE("property: canonical keys ignore placeholder names and spacing") {
  Rng rng(41);
  for (int i = 0; i < 1000; ++i) {
    int shape = static_cast<int>(gen::below(rng, 10));
    std::vector<int> ident = {1, 2, 3}, perm = {1, 2, 3, 4, 5, 6, 7};
    rng.shuffle(perm);
    perm.resize(3);
    std::string text = shape_text(shape, perm);
    std::string spaced;
    for (char ch : text) {
      spaced.push_back(ch);
      if (ch == ' ' && rng.bernoulli(0.3)) spaced += "  ";
    }
    auto a = parse_template(shape_text(shape, ident), Family::Sql);
    auto b = parse_template(spaced, Family::Sql);
    CHECK(a.canonical_key == b.canonical_key);
    CHECK(canonicalize(b) == b.canonical_key);
    // Idempotent: the canonical text parses to the same key.
    std::string body = b.canonical_key.substr(b.canonical_key.find('|') + 1);
    CHECK(parse_template(body, Family::Sql).canonical_key == b.canonical_key);
  }
}

TEST_CASE("dedupe keeps one template per structure") {
  // 100 templates over 40 structures (10 shapes x 4 limit variants).
  Rng rng(42);
  std::vector<ProgramTemplate> pool;
  std::vector<std::string> shapes;
  for (int s = 0; s < 40; ++s) {
    std::vector<int> ident = {1, 2, 3};
    shapes.push_back(shape_text(s % 10, ident, s / 10));
  }
  for (int i = 0; i < 100; ++i) {
    std::size_t s = i < 40 ? static_cast<std::size_t>(i) : gen::below(rng, 40);
    std::vector<int> perm = {4, 5, 6, 7, 8};
    rng.shuffle(perm);
    std::string text = shapes[s];
    for (int k = 1; k <= 3; ++k) {
      // rename ck/valk through a temporary token so indices do not collide
      for (const char* pre : {"c", "val"}) {
        std::string from = std::string(pre) + std::to_string(k);
        std::string to = std::string(pre) + "@" + std::to_string(perm[static_cast<std::size_t>(k - 1)]);
        for (std::size_t at = text.find(from); at != std::string::npos; at = text.find(from, at + to.size())) {
          bool word_start = at == 0 || text[at - 1] == ' ' || text[at - 1] == '(';
          if (word_start) text.replace(at, from.size(), to);
          else at += 1;
        }
      }
    }
    text.erase(std::remove(text.begin(), text.end(), '@'), text.end());
    pool.push_back(parse_template(text, Family::Sql));
  }
  std::map<std::string, int> groups;
  for (const auto& t : pool) groups[canonicalize(t)]++;
  CHECK(groups.size() == 40);
  CHECK(dedupe_templates(pool).size() == 40);
}
