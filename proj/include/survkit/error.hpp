#pragma once

#include <stdexcept>
#include <string>

namespace survkit {

// Input problems (bad files, bad arguments) derive from InputError; the CLI
// maps them to exit code 2. Everything else is a runtime failure (exit 1).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SchemaError : public InputError {
 public:
  using InputError::InputError;
};

class ParseError : public InputError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public InputError {
 public:
  using InputError::InputError;
};

class ArgumentError : public InputError {
 public:
  using InputError::InputError;
};

// Model used before it is ready (e.g. survival curve without baseline).
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Numerical failure while fitting.
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Data that parses fine but cannot be scored, e.g. a test set without any
// comparable pair.
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace survkit
