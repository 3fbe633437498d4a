#pragma once

#include "tabsynth/program.hpp"

#include <condition_variable>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace tabsynth {

struct Realization {
  enum class Source { Rule, External };
  std::string text;
  Source source = Source::Rule;
  bool fidelity_ok = false;
};

const char* to_string(Realization::Source s);

/// Grammar-directed English rendering of an instantiated program. Shapes no
/// rule covers, and rule text that would drop a span, fall back to the printed
/// program (fidelity forced true).
Realization realize_rule(const Program& p);

/// Spans a sentence must contain: column names, row names of addressed
/// cells, and literals.
std::vector<std::string> fidelity_spans(const Program& p);
/// Every span occurs in `text`; literals also match by canonical or
/// thousands-grouped rendering.
bool check_fidelity(std::string_view text, const Program& p);

struct GeneratorEndpoint {
  enum class Transport { Subprocess, Http };
  Transport transport = Transport::Subprocess;
  /// Shell command line, or http://host:port/path.
  std::string address;
  int timeout_ms = 5000;
  int max_in_flight = 4;

  /// Throws ConfigError.
  void validate() const;
};

/// Client for an external program-to-text generator. One JSON object per
/// line each way: {"family","program"} out, {"text"} back. Thread-safe.
class ExternalGenerator {
 public:
  explicit ExternalGenerator(GeneratorEndpoint ep);
  ~ExternalGenerator();
  ExternalGenerator(const ExternalGenerator&) = delete;
  ExternalGenerator& operator=(const ExternalGenerator&) = delete;

  /// The generated text, or nothing after a timeout, transport failure or
  /// malformed response (one retry).
  std::optional<std::string> request(Family family, const std::string& program);

  const GeneratorEndpoint& endpoint() const { return ep_; }
  /// Requests that ended without usable text.
  std::size_t failures() const;

 private:
  std::optional<std::string> request_once(const std::string& line);
  std::optional<std::string> subprocess_roundtrip(const std::string& line);
  std::optional<std::string> http_roundtrip(const std::string& line);
  bool start_process();
  void stop_process();

  GeneratorEndpoint ep_;
  mutable std::mutex mu_;
  std::condition_variable slots_cv_;
  int in_flight_ = 0;
  std::size_t failures_ = 0;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string read_buffer_;
};

/// External text when it passes the fidelity gate, otherwise the rule path.
Realization realize_external(const Program& p, ExternalGenerator& gen);

}  // namespace tabsynth
