#pragma once

#include <stdexcept>
#include <string>

namespace confreg {

// Root of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration: bad layout, missing auxiliary data, unknown kind.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed arguments to a pure function (dimension or index mismatch).
class InputError : public Error {
 public:
  using Error::Error;
};

// Non-finite values or degenerate normalizers.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Dataset content problems: empty data, labels out of range, missing ids.
class DataError : public Error {
 public:
  using Error::Error;
};

// Unparseable file content. Carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what), line_(line) {}
  explicit ParseError(const std::string& what) : Error(what) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_ = 0;
};

// Metric over an empty selection.
class MetricError : public Error {
 public:
  using Error::Error;
};

// A pipeline stage failed; `stage()` names it.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error("stage '" + stage + "' failed: " + what),
        stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace confreg
