#pragma once

#include <stdexcept>
#include <string>

namespace due {

// Shape/dimension violations on tensor operations.
class ShapeError : public std::invalid_argument {
public:
  explicit ShapeError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Invalid argument values (counts, rates, ranges).
class ArgumentError : public std::invalid_argument {
public:
  explicit ArgumentError(const std::string& msg) : std::invalid_argument(msg) {}
};

// API misuse: calling an operation outside its contract.
class ContractError : public std::logic_error {
public:
  explicit ContractError(const std::string& msg) : std::logic_error(msg) {}
};

// Cholesky failed even after the jitter escalation ladder.
class DecompositionError : public std::runtime_error {
public:
  DecompositionError(const std::string& msg, double attempted_jitter)
      : std::runtime_error(msg), attempted_jitter(attempted_jitter) {}
  double attempted_jitter;
};

// Triangular solve against a zero diagonal element.
class SingularMatrixError : public std::runtime_error {
public:
  explicit SingularMatrixError(const std::string& msg) : std::runtime_error(msg) {}
};

// Configuration file problems; carries the offending key when known.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& msg, std::string key = "")
      : std::runtime_error(msg), key(std::move(key)) {}
  std::string key;
};

// Training aborted (non-finite loss or similar); carries a diagnostic record.
class TrainingAbort : public std::runtime_error {
public:
  TrainingAbort(const std::string& msg, std::string diagnostic)
      : std::runtime_error(msg), diagnostic(std::move(diagnostic)) {}
  std::string diagnostic;
};

}  // namespace due
