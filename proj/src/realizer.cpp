#include "tabsynth/realizer.hpp"

#include "tabsynth/error.hpp"

#include <httplib.h>
#include <json.hpp>

#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cctype>
#include <chrono>
#include <cstring>

namespace tabsynth {

using nlohmann::json;

const char* to_string(Realization::Source s) { return s == Realization::Source::Rule ? "rule" : "external"; }

namespace {

struct UnsupportedShape {};

std::string lit(const Value& v) { return v.is_text() ? v.text_value() : v.surface(); }

std::string name_of(const ColumnSlot& c) {
  if (const auto* n = std::get_if<std::string>(&c)) return *n;
  throw UnsupportedShape{};
}

const Value& value_of(const ValueSlot& v) {
  if (const auto* lit = std::get_if<Value>(&v)) return *lit;
  throw UnsupportedShape{};
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

std::string sentence(std::string s, char end) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s + end;
}

std::string ordinal(const Value& v) {
  std::string n = lit(v);
  std::string suffix = "th";
  if (!n.empty()) {
    char last = n.back();
    bool teen = n.size() >= 2 && n[n.size() - 2] == '1';
    if (!teen && last == '1') suffix = "st";
    else if (!teen && last == '2') suffix = "nd";
    else if (!teen && last == '3') suffix = "rd";
  }
  return n + suffix;
}

// ---------------------------------------------------------------------------
// SQL

std::string sql_condition(const SqlCondition& c) {
  const char* rel = c.op == CmpOp::Eq ? " is " : c.op == CmpOp::Gt ? " is greater than " : " is less than ";
  return name_of(c.column) + rel + lit(value_of(c.operand));
}

std::string realize_sql(const SqlQuery& q) {
  std::vector<std::string> conds;
  for (const auto& c : q.where) conds.push_back(sql_condition(c));
  const std::string when = conds.empty() ? "" : " when " + join(conds, " and ");
  const std::string sel = name_of(q.select.column);

  if (q.select.kind == SqlSelect::Kind::Column && q.order_by && q.limit == 1) {
    const char* most = q.order_by->descending ? "most" : "least";
    return "Which " + sel + " has the " + most + " " + name_of(q.order_by->column) + when + "?";
  }

  std::string scope;
  if (q.order_by) {
    const std::string ord = name_of(q.order_by->column);
    const char* most = q.order_by->descending ? "most" : "least";
    scope = q.limit ? " among the " + std::to_string(*q.limit) + " rows with the " + most + " " + ord
                    : std::string(" with rows ordered by ") + ord + (q.order_by->descending ? " descending" : " ascending");
  } else if (q.limit) {
    scope = " among the first " + std::to_string(*q.limit) + " rows";
  }

  switch (q.select.kind) {
    case SqlSelect::Kind::Column:
      if (conds.empty() && scope.empty()) return "What are all the " + sel + " values?";
      return "What is the " + sel + when + scope + "?";
    case SqlSelect::Kind::Agg:
      switch (q.select.fn) {
        case AggFn::Count: return "How many " + sel + " entries are there" + when + scope + "?";
        case AggFn::Max: return "What is the highest " + sel + when + scope + "?";
        case AggFn::Min: return "What is the lowest " + sel + when + scope + "?";
        case AggFn::Sum: return "What is the total " + sel + when + scope + "?";
      }
      break;
    case SqlSelect::Kind::Diff:
      return "What is the difference between " + sel + " and " + name_of(q.select.other) + when + scope + "?";
  }
  throw UnsupportedShape{};
}

// ---------------------------------------------------------------------------
// Logical forms

struct RowsPhrase {
  std::vector<std::string> conds;
  std::string single;  // set when the node selects one row

  std::string plural() const {
    if (!single.empty()) return single;
    return conds.empty() ? "all rows" : "rows where " + join(conds, " and ");
  }
  std::string singular() const {
    if (!single.empty()) return single;
    return conds.empty() ? "the first row" : "the row where " + join(conds, " and ");
  }
  std::string scope() const {
    if (!single.empty()) return " of " + single;
    return conds.empty() ? "" : " among rows where " + join(conds, " and ");
  }
};

const LogicNode& node_of(const LogicArg& a) {
  if (const auto* b = std::get_if<Box<LogicNode>>(&a)) return **b;
  throw UnsupportedShape{};
}

RowsPhrase rows_phrase(const LogicArg& a) {
  if (std::holds_alternative<AllRows>(a)) return {};
  const LogicNode& n = node_of(a);
  RowsPhrase inner = rows_phrase(n.args[0]);
  switch (n.op) {
    case LogicOp::FilterAll: return inner;
    case LogicOp::FilterEq:
    case LogicOp::FilterNotEq:
    case LogicOp::FilterGreater:
    case LogicOp::FilterLess: {
      if (!inner.single.empty()) throw UnsupportedShape{};
      const char* rel = n.op == LogicOp::FilterEq      ? " is "
                        : n.op == LogicOp::FilterNotEq ? " is not "
                        : n.op == LogicOp::FilterGreater ? " is greater than "
                                                         : " is less than ";
      inner.conds.push_back(name_of(std::get<ColumnSlot>(n.args[1])) + rel + lit(value_of(std::get<ValueSlot>(n.args[2]))));
      return inner;
    }
    case LogicOp::Argmax:
    case LogicOp::Argmin:
    case LogicOp::NthArgmax:
    case LogicOp::NthArgmin: {
      const bool high = n.op == LogicOp::Argmax || n.op == LogicOp::NthArgmax;
      std::string rank = n.op == LogicOp::NthArgmax || n.op == LogicOp::NthArgmin
                             ? ordinal(value_of(std::get<ValueSlot>(n.args[2]))) + " "
                             : "";
      RowsPhrase out;
      out.single = "the row with the " + rank + (high ? "highest " : "lowest ") + name_of(std::get<ColumnSlot>(n.args[1])) +
                   inner.scope();
      return out;
    }
    default: throw UnsupportedShape{};
  }
}

std::string scalar_phrase(const LogicArg& a) {
  if (const auto* v = std::get_if<ValueSlot>(&a)) return lit(value_of(*v));
  const LogicNode& n = node_of(a);
  switch (n.op) {
    case LogicOp::Count: return "the number of " + rows_phrase(n.args[0]).plural();
    case LogicOp::Hop: return "the " + name_of(std::get<ColumnSlot>(n.args[1])) + " of " + rows_phrase(n.args[0]).singular();
    case LogicOp::Max:
    case LogicOp::Min:
    case LogicOp::Sum:
    case LogicOp::Avg: {
      const char* agg = n.op == LogicOp::Max ? "highest" : n.op == LogicOp::Min ? "lowest" : n.op == LogicOp::Sum ? "total" : "average";
      return std::string("the ") + agg + " " + name_of(std::get<ColumnSlot>(n.args[1])) + rows_phrase(n.args[0]).scope();
    }
    case LogicOp::NthMax:
    case LogicOp::NthMin:
      return "the " + ordinal(value_of(std::get<ValueSlot>(n.args[2]))) + (n.op == LogicOp::NthMax ? " highest " : " lowest ") +
             name_of(std::get<ColumnSlot>(n.args[1])) + rows_phrase(n.args[0]).scope();
    default: throw UnsupportedShape{};
  }
}

std::string bool_phrase(const LogicNode& n) {
  switch (n.op) {
    case LogicOp::And: return bool_phrase(node_of(n.args[0])) + ", and " + bool_phrase(node_of(n.args[1]));
    case LogicOp::Eq:
      if (const auto* b = std::get_if<Box<LogicNode>>(&n.args[0]); b && (*b)->op == LogicOp::Count) {
        RowsPhrase rows = rows_phrase((*b)->args[0]);
        if (rows.single.empty()) {
          std::string count = scalar_phrase(n.args[1]);
          return "there are " + count + (rows.conds.empty() ? " rows in total" : " rows where " + join(rows.conds, " and "));
        }
      }
      return scalar_phrase(n.args[0]) + " is " + scalar_phrase(n.args[1]);
    case LogicOp::NotEq: return scalar_phrase(n.args[0]) + " is not " + scalar_phrase(n.args[1]);
    case LogicOp::Greater: return scalar_phrase(n.args[0]) + " is greater than " + scalar_phrase(n.args[1]);
    case LogicOp::Less: return scalar_phrase(n.args[0]) + " is less than " + scalar_phrase(n.args[1]);
    case LogicOp::MostEq:
    case LogicOp::AllEq:
    case LogicOp::Unique: {
      RowsPhrase rows = rows_phrase(n.args[0]);
      if (!rows.single.empty()) throw UnsupportedShape{};
      std::string where = rows.conds.empty() ? "" : " where " + join(rows.conds, " and ");
      std::string tail = name_of(std::get<ColumnSlot>(n.args[1])) + " equal to " + lit(value_of(std::get<ValueSlot>(n.args[2])));
      if (n.op == LogicOp::MostEq) return "most rows" + where + " have " + tail;
      if (n.op == LogicOp::AllEq) return "all rows" + where + " have " + tail;
      return "exactly one row" + where + " has " + tail;
    }
    default: throw UnsupportedShape{};
  }
}

// ---------------------------------------------------------------------------
// Arithmetic

class ArithPhraser {
 public:
  explicit ArithPhraser(const ArithExpr& e) : e_(e), used_(e.steps.size(), false) {}

  std::string question() {
    if (e_.steps.empty()) throw UnsupportedShape{};
    if (auto pct = percentage_change()) return *pct;
    const std::size_t last = e_.steps.size() - 1;
    std::string body;
    if (e_.steps[last].op == ArithOp::Greater) {
      const auto& s = e_.steps[last];
      body = "Is " + operand(s.args[0]) + " greater than " + operand(s.args[1]) + "?";
    } else {
      body = "What is " + step(last) + "?";
    }
    for (std::size_t i = 0; i < last; ++i) {
      if (!used_[i]) throw UnsupportedShape{};
    }
    return body;
  }

 private:
  std::optional<std::string> percentage_change() const {
    if (e_.steps.size() != 2) return std::nullopt;
    const auto& sub = e_.steps[0];
    const auto& div = e_.steps[1];
    if (sub.op != ArithOp::Subtract || div.op != ArithOp::Divide) return std::nullopt;
    const auto* now = std::get_if<CellSel>(&sub.args[0]);
    const auto* before = std::get_if<CellSel>(&sub.args[1]);
    const auto* ref = std::get_if<StepRef>(&div.args[0]);
    const auto* base = std::get_if<CellSel>(&div.args[1]);
    if (!now || !before || !ref || !base || ref->index != 0 || !(*base == *before)) return std::nullopt;
    if (now->row != before->row || now->column == before->column) return std::nullopt;
    return "What was the percentage change in " + now->row + " between " + before->column + " and " + now->column + "?";
  }

  std::string operand(const ArithOperand& a) {
    if (const auto* v = std::get_if<Value>(&a)) return lit(*v);
    if (const auto* c = std::get_if<CellSel>(&a)) return "the " + c->column + " of " + c->row;
    if (const auto* r = std::get_if<StepRef>(&a)) return step(r->index);
    if (const auto* c = std::get_if<ColumnSlot>(&a)) return name_of(*c);
    throw UnsupportedShape{};
  }

  std::string step(std::size_t i) {
    used_[i] = true;
    const ArithStep& s = e_.steps[i];
    switch (s.op) {
      case ArithOp::Add: return "the sum of " + operand(s.args[0]) + " and " + operand(s.args[1]);
      case ArithOp::Subtract: return "the difference between " + operand(s.args[0]) + " and " + operand(s.args[1]);
      case ArithOp::Multiply: return "the product of " + operand(s.args[0]) + " and " + operand(s.args[1]);
      case ArithOp::Divide: return "the result of dividing " + operand(s.args[0]) + " by " + operand(s.args[1]);
      case ArithOp::Greater: return "whether " + operand(s.args[0]) + " is greater than " + operand(s.args[1]);
      case ArithOp::Exp: return operand(s.args[0]) + " raised to the power of " + operand(s.args[1]);
      case ArithOp::TableMax: return "the highest " + operand(s.args[0]);
      case ArithOp::TableMin: return "the lowest " + operand(s.args[0]);
      case ArithOp::TableSum: return "the total " + operand(s.args[0]);
      case ArithOp::TableAverage: return "the average " + operand(s.args[0]);
    }
    throw UnsupportedShape{};
  }

  const ArithExpr& e_;
  std::vector<bool> used_;
};

// ---------------------------------------------------------------------------

struct Spans {
  std::vector<std::string> names;
  std::vector<Value> literals;
};

void logic_spans(const LogicNode& n, Spans& s) {
  for (const auto& a : n.args) {
    if (const auto* b = std::get_if<Box<LogicNode>>(&a)) logic_spans(**b, s);
    else if (const auto* v = std::get_if<ValueSlot>(&a)) {
      if (const auto* l = std::get_if<Value>(v)) s.literals.push_back(*l);
    }
  }
}

Spans collect_spans(const Program& p) {
  Spans s;
  s.names = referenced_columns(p);
  if (const auto* q = std::get_if<SqlQuery>(&p.ast)) {
    for (const auto& c : q->where) {
      if (const auto* l = std::get_if<Value>(&c.operand)) s.literals.push_back(*l);
    }
  } else if (const auto* n = std::get_if<LogicNode>(&p.ast)) {
    logic_spans(*n, s);
  } else {
    for (const auto& step : p.arith().steps) {
      for (const auto& a : step.args) {
        if (const auto* l = std::get_if<Value>(&a)) s.literals.push_back(*l);
        else if (const auto* c = std::get_if<CellSel>(&a)) {
          s.names.push_back(c->column);
          s.names.push_back(c->row);
        }
      }
    }
  }
  return s;
}

}  // namespace

std::vector<std::string> fidelity_spans(const Program& p) {
  Spans s = collect_spans(p);
  std::vector<std::string> out = s.names;
  for (const auto& v : s.literals) out.push_back(lit(v));
  return out;
}

bool check_fidelity(std::string_view text, const Program& p) {
  Spans s = collect_spans(p);
  for (const auto& n : s.names) {
    if (text.find(n) == std::string_view::npos) return false;
  }
  for (const auto& v : s.literals) {
    if (!mentions(text, v)) return false;
  }
  return true;
}

Realization realize_rule(const Program& p) {
  Realization r;
  r.source = Realization::Source::Rule;
  try {
    switch (p.family) {
      case Family::Sql: r.text = realize_sql(p.sql()); break;
      case Family::Logic: r.text = sentence(bool_phrase(p.logic()), '.'); break;
      case Family::Arith: r.text = ArithPhraser(p.arith()).question(); break;
    }
    if (!check_fidelity(r.text, p)) throw UnsupportedShape{};  // e.g. filter_all drops its column
    r.fidelity_ok = true;
  } catch (const UnsupportedShape&) {
    r.text = print_program(p);
    r.fidelity_ok = true;
  }
  return r;
}

// ---------------------------------------------------------------------------
// External generator

void GeneratorEndpoint::validate() const {
  if (address.empty()) throw ConfigError("generator address is empty");
  if (timeout_ms <= 0) throw ConfigError("generator timeout must be positive");
  if (max_in_flight < 1) throw ConfigError("generator max_in_flight must be at least 1");
  if (transport == Transport::Http && address.rfind("http://", 0) != 0) {
    throw ConfigError("http generator address must start with http://");
  }
}

ExternalGenerator::ExternalGenerator(GeneratorEndpoint ep) : ep_(std::move(ep)) { ep_.validate(); }

ExternalGenerator::~ExternalGenerator() {
  std::lock_guard lock(mu_);
  stop_process();
}

std::size_t ExternalGenerator::failures() const {
  std::lock_guard lock(mu_);
  return failures_;
}

std::optional<std::string> ExternalGenerator::request(Family family, const std::string& program) {
  json req = json::object();
  req["family"] = to_string(family);
  req["program"] = program;
  const std::string line = req.dump();
  for (int attempt = 0; attempt < 2; ++attempt) {
    if (auto text = request_once(line)) return text;
  }
  std::lock_guard lock(mu_);
  ++failures_;
  return std::nullopt;
}

std::optional<std::string> ExternalGenerator::request_once(const std::string& line) {
  std::optional<std::string> reply;
  if (ep_.transport == GeneratorEndpoint::Transport::Subprocess) {
    std::lock_guard lock(mu_);
    reply = subprocess_roundtrip(line);
  } else {
    {
      std::unique_lock lock(mu_);
      slots_cv_.wait(lock, [&] { return in_flight_ < ep_.max_in_flight; });
      ++in_flight_;
    }
    reply = http_roundtrip(line);
    {
      std::lock_guard lock(mu_);
      --in_flight_;
    }
    slots_cv_.notify_one();
  }
  if (!reply) return std::nullopt;
  try {
    json j = json::parse(*reply);
    if (!j.is_object() || !j.contains("text") || !j["text"].is_string()) return std::nullopt;
    std::string text = j["text"].get<std::string>();
    if (trim(text).empty()) return std::nullopt;
    return text;
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

bool ExternalGenerator::start_process() {
  int in_pipe[2], out_pipe[2];
  if (pipe(in_pipe) != 0) return false;
  if (pipe(out_pipe) != 0) {
    close(in_pipe[0]);
    close(in_pipe[1]);
    return false;
  }
  pid_t pid = fork();
  if (pid < 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) close(fd);
    return false;
  }
  if (pid == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) close(fd);
    execl("/bin/sh", "sh", "-c", ep_.address.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  read_buffer_.clear();
  signal(SIGPIPE, SIG_IGN);
  return true;
}

void ExternalGenerator::stop_process() {
  if (pid_ < 0) return;
  close(to_child_);
  close(from_child_);
  kill(pid_, SIGTERM);
  waitpid(pid_, nullptr, 0);
  pid_ = to_child_ = from_child_ = -1;
  read_buffer_.clear();
}

std::optional<std::string> ExternalGenerator::subprocess_roundtrip(const std::string& line) {
  if (pid_ < 0 && !start_process()) return std::nullopt;
  std::string out = line + "\n";
  std::size_t written = 0;
  while (written < out.size()) {
    ssize_t n = write(to_child_, out.data() + written, out.size() - written);
    if (n <= 0) {
      stop_process();
      return std::nullopt;
    }
    written += static_cast<std::size_t>(n);
  }
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(ep_.timeout_ms);
  for (;;) {
    if (auto nl = read_buffer_.find('\n'); nl != std::string::npos) {
      std::string reply = read_buffer_.substr(0, nl);
      read_buffer_.erase(0, nl + 1);
      return reply;
    }
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now()).count();
    if (left <= 0) break;
    pollfd pfd{from_child_, POLLIN, 0};
    int ready = poll(&pfd, 1, static_cast<int>(left));
    if (ready <= 0) break;
    char buf[4096];
    ssize_t n = read(from_child_, buf, sizeof buf);
    if (n <= 0) break;
    read_buffer_.append(buf, static_cast<std::size_t>(n));
  }
  // A late reply would desynchronize the stream; start over next time.
  stop_process();
  return std::nullopt;
}

std::optional<std::string> ExternalGenerator::http_roundtrip(const std::string& line) {
  const std::string& url = ep_.address;
  std::size_t host_start = std::strlen("http://");
  std::size_t path_start = url.find('/', host_start);
  std::string host = url.substr(host_start, path_start == std::string::npos ? std::string::npos : path_start - host_start);
  std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);
  httplib::Client client("http://" + host);
  const auto timeout = std::chrono::milliseconds(ep_.timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  auto res = client.Post(path, line + "\n", "application/json");
  if (!res || res->status != 200) return std::nullopt;
  std::string body = res->body;
  while (!body.empty() && (body.back() == '\n' || body.back() == '\r')) body.pop_back();
  return body;
}

Realization realize_external(const Program& p, ExternalGenerator& gen) {
  if (auto text = gen.request(p.family, print_program(p))) {
    if (check_fidelity(*text, p)) return {*text, Realization::Source::External, true};
  }
  return realize_rule(p);
}

}  // namespace tabsynth
