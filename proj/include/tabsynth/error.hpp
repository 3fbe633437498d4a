#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tabsynth {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Ragged rows, duplicate or missing headers, unparsable table files.
class MalformedInput : public Error {
 public:
  MalformedInput(const std::string& what, std::size_t line = 0, std::size_t column = 0)
      : Error(line ? what + " (line " + std::to_string(line) +
                         (column ? ", column " + std::to_string(column) : std::string()) + ")"
                   : what),
        line_(line),
        column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Program or template text that does not fit its family grammar.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " at offset " + std::to_string(position)), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

class ArityError : public ParseError {
 public:
  using ParseError::ParseError;
};

/// A value placeholder whose column cannot be determined from its position.
class DanglingValue : public ParseError {
 public:
  using ParseError::ParseError;
};

enum class ExecErrorKind {
  TypeError,
  MissingColumn,
  EmptyIntermediate,
  DivideByZero,
  UnresolvedCell,
  AmbiguousRow,
  Domain,
  OpenSlot,
};

const char* to_string(ExecErrorKind kind);

class ExecError : public Error {
 public:
  ExecError(ExecErrorKind kind, const std::string& what)
      : Error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ExecErrorKind kind() const { return kind_; }

 private:
  ExecErrorKind kind_;
};

/// The requested claim label cannot be reached by choosing the open argument.
class CannotPerturb : public Error {
 public:
  using Error::Error;
};

/// The table cannot supply distinct columns (or cells) for a template.
class NoEligibleColumns : public Error {
 public:
  using Error::Error;
};

/// The bound column has no non-Empty cell to draw a value from.
class NoEligibleValues : public Error {
 public:
  using Error::Error;
};

class IncompleteBinding : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace tabsynth
