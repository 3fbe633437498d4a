#include "tabsynth/error.hpp"
#include "tabsynth/program.hpp"

#include "program_internal.hpp"

#include <cctype>

namespace tabsynth {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }
bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || static_cast<unsigned char>(c) >= 0x80;
}
bool is_ident_char(char c) { return is_ident_start(c) || is_digit(c); }

// ---------------------------------------------------------------------------
// Token stream shared by the SQL and arithmetic grammars.

struct Token {
  enum class Kind { Ident, Quoted, String, Number, Hash, Symbol, End };
  Kind kind = Kind::End;
  std::string text;  // identifier / unquoted content / number lexeme / symbol
  std::size_t pos = 0;
};

std::string read_quoted(std::string_view src, std::size_t& i, char quote) {
  std::size_t start = i;
  ++i;
  std::string out;
  for (;;) {
    if (i >= src.size()) throw ParseError(std::string("unterminated ") + quote + "-quoted text", start);
    char c = src[i++];
    if (c == quote) {
      if (i < src.size() && src[i] == quote) {
        out.push_back(quote);
        ++i;
        continue;
      }
      return out;
    }
    out.push_back(c);
  }
}

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < src.size()) {
    char c = src[i];
    if (is_space(c)) {
      ++i;
      continue;
    }
    Token t;
    t.pos = i;
    if (c == '`') {
      t.kind = Token::Kind::Quoted;
      t.text = read_quoted(src, i, '`');
    } else if (c == '\'') {
      t.kind = Token::Kind::String;
      t.text = read_quoted(src, i, '\'');
    } else if (c == '#') {
      ++i;
      std::size_t start = i;
      while (i < src.size() && is_digit(src[i])) ++i;
      if (start == i) throw ParseError("expected step index after '#'", t.pos);
      t.kind = Token::Kind::Hash;
      t.text = std::string(src.substr(start, i - start));
    } else if (is_digit(c) || (c == '.' && i + 1 < src.size() && is_digit(src[i + 1]))) {
      std::size_t start = i;
      while (i < src.size() && is_digit(src[i])) ++i;
      if (i < src.size() && src[i] == '.') {
        ++i;
        while (i < src.size() && is_digit(src[i])) ++i;
      }
      if (i < src.size() && is_ident_char(src[i])) {
        // e.g. `2019a`: an identifier that starts with digits.
        while (i < src.size() && is_ident_char(src[i])) ++i;
        t.kind = Token::Kind::Ident;
      } else {
        t.kind = Token::Kind::Number;
      }
      t.text = std::string(src.substr(start, i - start));
    } else if (is_ident_start(c)) {
      std::size_t start = i;
      while (i < src.size() && is_ident_char(src[i])) ++i;
      t.kind = Token::Kind::Ident;
      t.text = std::string(src.substr(start, i - start));
    } else if (std::string_view("(),=<>-*").find(c) != std::string_view::npos) {
      t.kind = Token::Kind::Symbol;
      t.text = std::string(1, c);
      ++i;
    } else {
      throw ParseError(std::string("unexpected character '") + c + "'", i);
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.pos = src.size();
  out.push_back(end);
  return out;
}

class TokenCursor {
 public:
  explicit TokenCursor(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  const Token& peek(std::size_t ahead = 0) const {
    return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
  }
  const Token& next() {
    const Token& t = tokens_[pos_];
    if (pos_ + 1 < tokens_.size()) ++pos_;
    return t;
  }
  bool at_end() const { return peek().kind == Token::Kind::End; }

  bool is_keyword(std::string_view kw, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind == Token::Kind::Ident && to_lower(t.text) == kw;
  }
  bool is_symbol(char c, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind == Token::Kind::Symbol && t.text[0] == c;
  }
  void expect_keyword(std::string_view kw) {
    if (!is_keyword(kw)) throw ParseError("expected '" + std::string(kw) + "'", peek().pos);
    next();
  }
  void expect_symbol(char c) {
    if (!is_symbol(c)) throw ParseError(std::string("expected '") + c + "'", peek().pos);
    next();
  }

 private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

Value number_literal(const std::string& lexeme, bool negative, std::size_t pos) {
  auto d = Decimal::parse(lexeme);
  if (!d) throw ParseError("malformed number '" + lexeme + "'", pos);
  return Value::number(negative ? -*d : *d);
}

// ---------------------------------------------------------------------------
// SQL

constexpr std::string_view kSqlKeywords[] = {"select", "from", "where", "and", "order", "by",
                                             "asc",    "desc", "limit", "count", "max", "min", "sum"};

bool is_sql_keyword(const std::string& word) {
  std::string lower = to_lower(word);
  for (auto kw : kSqlKeywords) {
    if (kw == lower) return true;
  }
  return false;
}

class SqlParser {
 public:
  SqlParser(std::string_view text, bool template_mode) : cur_(tokenize(text)), template_mode_(template_mode) {}

  SqlQuery parse() {
    SqlQuery q;
    cur_.expect_keyword("select");
    q.select = parse_select();
    cur_.expect_keyword("from");
    if (!cur_.is_keyword("w")) throw ParseError("the table is always named 'w'", cur_.peek().pos);
    cur_.next();
    if (cur_.is_keyword("where")) {
      cur_.next();
      q.where.push_back(parse_condition());
      while (cur_.is_keyword("and")) {
        cur_.next();
        q.where.push_back(parse_condition());
      }
    }
    if (cur_.is_keyword("order")) {
      cur_.next();
      cur_.expect_keyword("by");
      SqlOrder order;
      order.column = parse_column();
      if (cur_.is_keyword("desc")) {
        order.descending = true;
        cur_.next();
      } else if (cur_.is_keyword("asc")) {
        cur_.next();
      }
      q.order_by = std::move(order);
    }
    if (cur_.is_keyword("limit")) {
      cur_.next();
      const Token& t = cur_.next();
      if (t.kind != Token::Kind::Number || t.text.find('.') != std::string::npos) {
        throw ParseError("limit expects a positive integer", t.pos);
      }
      std::int64_t n = std::stoll(t.text);
      if (n <= 0) throw ParseError("limit expects a positive integer", t.pos);
      q.limit = n;
    }
    if (!cur_.at_end()) throw ParseError("unexpected '" + cur_.peek().text + "'", cur_.peek().pos);
    return q;
  }

 private:
  SqlSelect parse_select() {
    SqlSelect s;
    const Token& t = cur_.peek();
    if (t.kind == Token::Kind::Ident && cur_.is_symbol('(', 1)) {
      std::string fn = to_lower(t.text);
      if (fn == "count") s.fn = AggFn::Count;
      else if (fn == "max") s.fn = AggFn::Max;
      else if (fn == "min") s.fn = AggFn::Min;
      else if (fn == "sum") s.fn = AggFn::Sum;
      else throw ParseError("unknown aggregate '" + t.text + "'", t.pos);
      cur_.next();
      cur_.next();
      s.kind = SqlSelect::Kind::Agg;
      s.column = parse_column();
      cur_.expect_symbol(')');
      return s;
    }
    s.column = parse_column();
    if (cur_.is_symbol('-')) {
      cur_.next();
      s.kind = SqlSelect::Kind::Diff;
      s.other = parse_column();
    }
    return s;
  }

  ColumnSlot parse_column() {
    const Token& t = cur_.next();
    if (t.kind == Token::Kind::Quoted) {
      if (normalize_space(t.text).empty()) throw ParseError("empty column name", t.pos);
      return normalize_space(t.text);
    }
    if (t.kind != Token::Kind::Ident) throw ParseError("expected a column", t.pos);
    if (is_sql_keyword(t.text) || to_lower(t.text) == "w") {
      throw ParseError("reserved word '" + t.text + "' used as a column; quote it with backticks", t.pos);
    }
    if (template_mode_) {
      if (auto ph = detail::match_column_placeholder(t.text)) return *ph;
    }
    return t.text;
  }

  SqlCondition parse_condition() {
    SqlCondition c;
    c.column = parse_column();
    const Token& op = cur_.next();
    if (op.kind != Token::Kind::Symbol || (op.text != "=" && op.text != ">" && op.text != "<")) {
      throw ParseError("expected '=', '>' or '<'", op.pos);
    }
    c.op = op.text == "=" ? CmpOp::Eq : op.text == ">" ? CmpOp::Gt : CmpOp::Lt;
    c.operand = parse_operand();
    return c;
  }

  ValueSlot parse_operand() {
    bool negative = false;
    if (cur_.is_symbol('-')) {
      negative = true;
      cur_.next();
    }
    const Token& t = cur_.next();
    if (t.kind == Token::Kind::Number) return number_literal(t.text, negative, t.pos);
    if (negative) throw ParseError("expected a number after '-'", t.pos);
    if (t.kind == Token::Kind::String) return Value::text(t.text);
    if (t.kind == Token::Kind::Ident && template_mode_) {
      if (auto idx = detail::match_value_placeholder(t.text)) return ValuePlaceholder{*idx};
    }
    throw ParseError("expected a literal ('text' or number)", t.pos);
  }

  TokenCursor cur_;
  bool template_mode_;
};

// ---------------------------------------------------------------------------
// Logical forms: operators with `{ ; }` argument lists; atoms are read by
// the argument kind the operator expects.

struct RawArg {
  enum class Kind { Node, Bare, Quoted, Backtick };
  Kind kind = Kind::Bare;
  std::string text;
  LogicNode node;
  ResultKind result = ResultKind::Scalar;
  std::size_t pos = 0;
};

class LogicParser {
 public:
  LogicParser(std::string_view text, bool template_mode) : src_(text), template_mode_(template_mode) {}

  LogicNode parse() {
    skip_space();
    std::size_t start = i_;
    std::string word = read_bare();
    skip_space();
    if (i_ >= src_.size() || src_[i_] != '{') throw ParseError("expected an operator", start);
    ResultKind rk;
    LogicNode root = parse_node(normalize_space(word), start, rk);
    skip_space();
    if (i_ != src_.size()) throw ParseError("trailing text after logical form", i_);
    if (rk != ResultKind::Bool) throw ParseError("the root operator must be boolean-valued", start);
    return root;
  }

 private:
  void skip_space() {
    while (i_ < src_.size() && is_space(src_[i_])) ++i_;
  }

  std::string read_bare() {
    std::size_t start = i_;
    while (i_ < src_.size() && src_[i_] != ';' && src_[i_] != '{' && src_[i_] != '}') ++i_;
    return std::string(src_.substr(start, i_ - start));
  }

  LogicNode parse_node(const std::string& name, std::size_t name_pos, ResultKind& result) {
    const OpSignature* sig = find_logic_op(name);
    if (!sig) throw ParseError("unknown operator '" + name + "'", name_pos);
    ++i_;  // '{'
    std::vector<RawArg> raw;
    skip_space();
    if (i_ < src_.size() && src_[i_] == '}') {
      ++i_;
    } else {
      for (;;) {
        raw.push_back(parse_raw_arg());
        skip_space();
        if (i_ >= src_.size()) throw ParseError("unterminated argument list of '" + name + "'", name_pos);
        char c = src_[i_++];
        if (c == '}') break;
        if (c != ';') throw ParseError("expected ';' or '}'", i_ - 1);
      }
    }
    if (raw.size() != sig->args.size()) {
      throw ArityError("'" + name + "' takes " + std::to_string(sig->args.size()) + " arguments, got " +
                           std::to_string(raw.size()),
                       name_pos);
    }
    LogicNode node;
    node.op = sig->op;
    for (std::size_t k = 0; k < raw.size(); ++k) node.args.push_back(convert(std::move(raw[k]), sig->args[k]));
    result = sig->result;
    return node;
  }

  RawArg parse_raw_arg() {
    skip_space();
    RawArg a;
    a.pos = i_;
    if (i_ < src_.size() && (src_[i_] == '\'' || src_[i_] == '`')) {
      char q = src_[i_];
      a.kind = q == '\'' ? RawArg::Kind::Quoted : RawArg::Kind::Backtick;
      a.text = read_quoted(src_, i_, q);
      return a;
    }
    std::string word = read_bare();
    if (i_ < src_.size() && src_[i_] == '{') {
      a.kind = RawArg::Kind::Node;
      a.node = parse_node(normalize_space(word), a.pos, a.result);
      return a;
    }
    a.kind = RawArg::Kind::Bare;
    a.text = normalize_space(word);
    if (a.text.empty()) throw ParseError("empty argument", a.pos);
    return a;
  }

  LogicArg convert(RawArg a, ArgKind kind) {
    switch (kind) {
      case ArgKind::Rows:
        if (a.kind == RawArg::Kind::Node) {
          if (a.result != ResultKind::Rows) throw ParseError("expected a row set", a.pos);
          return Box<LogicNode>(std::move(a.node));
        }
        if (a.kind == RawArg::Kind::Bare && a.text == "all_rows") return AllRows{};
        throw ParseError("expected a row set (all_rows or a filter)", a.pos);
      case ArgKind::Column:
        if (a.kind == RawArg::Kind::Backtick) {
          if (normalize_space(a.text).empty()) throw ParseError("empty column name", a.pos);
          return ColumnSlot(normalize_space(a.text));
        }
        if (a.kind != RawArg::Kind::Bare) throw ParseError("expected a column name", a.pos);
        if (a.text == "all_rows") throw ParseError("expected a column name", a.pos);
        if (template_mode_) {
          if (auto ph = detail::match_column_placeholder(a.text)) return ColumnSlot(*ph);
        }
        return ColumnSlot(a.text);
      case ArgKind::Bool:
        if (a.kind != RawArg::Kind::Node || a.result != ResultKind::Bool) throw ParseError("expected a boolean operator", a.pos);
        return Box<LogicNode>(std::move(a.node));
      case ArgKind::Ordinal: {
        if (a.kind != RawArg::Kind::Bare) throw ParseError("expected a positive integer", a.pos);
        auto d = Decimal::parse(a.text);
        if (!d || !d->is_integer() || d->is_negative() || d->is_zero()) throw ParseError("expected a positive integer", a.pos);
        return ValueSlot(Value::number(*d));
      }
      case ArgKind::Scalar:
        if (a.kind == RawArg::Kind::Node) {
          if (a.result != ResultKind::Scalar) throw ParseError("expected a scalar", a.pos);
          return Box<LogicNode>(std::move(a.node));
        }
        [[fallthrough]];
      case ArgKind::Value:
        if (a.kind == RawArg::Kind::Node) throw ParseError("expected a literal value", a.pos);
        if (a.kind == RawArg::Kind::Quoted || a.kind == RawArg::Kind::Backtick) return ValueSlot(Value::text(a.text));
        if (template_mode_) {
          if (auto idx = detail::match_value_placeholder(a.text)) return ValueSlot(ValuePlaceholder{*idx});
        }
        {
          Value v = parse_value(a.text);
          if (v.is_empty()) throw ParseError("empty literal", a.pos);
          if (v.is_number()) v = Value::number(v.number());
          return ValueSlot(std::move(v));
        }
    }
    throw ParseError("unsupported argument", a.pos);
  }

  std::string_view src_;
  std::size_t i_ = 0;
  bool template_mode_;
};

// ---------------------------------------------------------------------------
// Arithmetic

std::optional<ArithOp> arith_op(const std::string& name) {
  static const std::pair<std::string_view, ArithOp> ops[] = {
      {"add", ArithOp::Add},           {"subtract", ArithOp::Subtract},   {"multiply", ArithOp::Multiply},
      {"divide", ArithOp::Divide},     {"greater", ArithOp::Greater},     {"exp", ArithOp::Exp},
      {"table_max", ArithOp::TableMax}, {"table_min", ArithOp::TableMin}, {"table_sum", ArithOp::TableSum},
      {"table_average", ArithOp::TableAverage}};
  std::string lower = to_lower(name);
  for (const auto& [n, op] : ops) {
    if (n == lower) return op;
  }
  return std::nullopt;
}

class ArithParser {
 public:
  ArithParser(std::string_view text, bool template_mode) : cur_(tokenize(text)), template_mode_(template_mode) {}

  ArithExpr parse() {
    ArithExpr e;
    for (;;) {
      e.steps.push_back(parse_step(e.steps.size()));
      if (cur_.at_end()) break;
      cur_.expect_symbol(',');
    }
    return e;
  }

 private:
  ArithStep parse_step(std::size_t index) {
    const Token& name = cur_.next();
    if (name.kind != Token::Kind::Ident) throw ParseError("expected an operation name", name.pos);
    auto op = arith_op(name.text);
    if (!op) throw ParseError("unknown operation '" + name.text + "'", name.pos);
    cur_.expect_symbol('(');
    ArithStep step;
    step.op = *op;
    std::vector<std::size_t> positions;
    if (!cur_.is_symbol(')')) {
      for (;;) {
        positions.push_back(cur_.peek().pos);
        step.args.push_back(parse_operand());
        if (cur_.is_symbol(')')) break;
        cur_.expect_symbol(',');
      }
    }
    cur_.expect_symbol(')');
    // FinQA-style `table_max(col, none)`.
    if (is_table_op(step.op) && step.args.size() == 2) {
      const auto* none = std::get_if<ColumnSlot>(&step.args[1]);
      if (none && std::holds_alternative<std::string>(*none) && to_lower(std::get<std::string>(*none)) == "none") {
        step.args.pop_back();
      }
    }
    std::size_t want = is_table_op(step.op) ? 1 : 2;
    if (step.args.size() != want) {
      throw ArityError("'" + name.text + "' takes " + std::to_string(want) + " argument" + (want == 1 ? "" : "s") +
                           ", got " + std::to_string(step.args.size()),
                       name.pos);
    }
    for (std::size_t k = 0; k < step.args.size(); ++k) {
      const auto& a = step.args[k];
      bool is_col = std::holds_alternative<ColumnSlot>(a);
      if (is_table_op(step.op) && !is_col) throw ParseError("table operations take a single column", positions[k]);
      if (!is_table_op(step.op) && is_col) throw ParseError("expected a number, cell (`col of row`) or #i", positions[k]);
      if (const auto* ref = std::get_if<StepRef>(&a); ref && ref->index >= index) {
        throw ParseError("#" + std::to_string(ref->index) + " must refer to an earlier step", positions[k]);
      }
    }
    return step;
  }

  bool at_operand_end() const { return cur_.is_symbol(',') || cur_.is_symbol(')') || cur_.at_end(); }

  std::string parse_name() {
    std::string out;
    std::size_t start = cur_.peek().pos;
    while (!at_operand_end() && !cur_.is_keyword("of")) {
      const Token& t = cur_.next();
      if (t.kind == Token::Kind::Quoted) {
        if (!out.empty()) throw ParseError("unexpected quoted name", t.pos);
        out = normalize_space(t.text);
        if (!at_operand_end() && !cur_.is_keyword("of")) throw ParseError("unexpected text after quoted name", cur_.peek().pos);
        if (out.empty()) throw ParseError("empty name", t.pos);
        return out;
      }
      if (t.kind != Token::Kind::Ident && t.kind != Token::Kind::Number) throw ParseError("unexpected '" + t.text + "'", t.pos);
      if (!out.empty()) out.push_back(' ');
      out += t.text;
    }
    if (out.empty()) throw ParseError("expected a name", start);
    return out;
  }

  ArithOperand parse_operand() {
    const Token& t = cur_.peek();
    if (t.kind == Token::Kind::Hash) {
      cur_.next();
      return StepRef{static_cast<std::size_t>(std::stoul(t.text))};
    }
    if (cur_.is_symbol('-')) {
      cur_.next();
      const Token& n = cur_.next();
      if (n.kind != Token::Kind::Number) throw ParseError("expected a number after '-'", n.pos);
      return number_literal(n.text, true, n.pos);
    }
    if (t.kind == Token::Kind::Number && (cur_.is_symbol(',', 1) || cur_.is_symbol(')', 1))) {
      cur_.next();
      return number_literal(t.text, false, t.pos);
    }
    if (template_mode_ && t.kind == Token::Kind::Ident && (cur_.is_symbol(',', 1) || cur_.is_symbol(')', 1))) {
      if (auto idx = detail::match_value_placeholder(t.text)) {
        cur_.next();
        return ValuePlaceholder{*idx};
      }
      if (auto ph = detail::match_column_placeholder(t.text)) {
        cur_.next();
        return ColumnSlot(*ph);
      }
    }
    std::string first = parse_name();
    if (cur_.is_keyword("of")) {
      cur_.next();
      std::string row = parse_name();
      return CellSel{std::move(first), std::move(row)};
    }
    return ColumnSlot(std::move(first));
  }

  TokenCursor cur_;
  bool template_mode_;
};

}  // namespace

namespace detail {

Program parse(std::string_view text, Family family, bool template_mode) {
  Program p;
  p.family = family;
  switch (family) {
    case Family::Sql: p.ast = SqlParser(text, template_mode).parse(); break;
    case Family::Logic: p.ast = LogicParser(text, template_mode).parse(); break;
    case Family::Arith: p.ast = ArithParser(text, template_mode).parse(); break;
  }
  return p;
}

}  // namespace detail

Program parse_program(std::string_view text, Family family) { return detail::parse(text, family, false); }

}  // namespace tabsynth
