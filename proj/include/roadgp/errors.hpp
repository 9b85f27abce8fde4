#pragma once

#include <stdexcept>
#include <string>

namespace roadgp {

/// Bad argument or shape mismatch passed to a library operation.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A factorization failed even after the jitter retry.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double smallest_pivot)
      : std::runtime_error(what), smallest_pivot_(smallest_pivot) {}

  double smallest_pivot() const noexcept { return smallest_pivot_; }

 private:
  double smallest_pivot_;
};

/// Scenario configuration is inconsistent or incomplete.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A module error raised inside the epoch loop, with epoch/agent context.
class RunError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data file.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace roadgp
