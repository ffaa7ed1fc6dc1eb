#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace ancestry {

// Base class for all library errors. `code()` is a stable machine-readable
// tag that the CLI forwards into its error JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class RankDeficientError : public Error {
 public:
  explicit RankDeficientError(const std::string& message)
      : Error("rank_deficient", message) {}
};

class InsufficientDataError : public Error {
 public:
  explicit InsufficientDataError(const std::string& message)
      : Error("insufficient_data", message) {}
};

class InvalidPValueError : public Error {
 public:
  explicit InvalidPValueError(const std::string& message)
      : Error("invalid_pvalue", message) {}
};

class NumericOverflowError : public Error {
 public:
  explicit NumericOverflowError(const std::string& message)
      : Error("numeric_overflow", message) {}
};

// Generic numeric failure (non-convergence, singular system, ...).
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& message)
      : Error("numeric", message) {}
};

// Violated model invariants (cyclic instantaneous structure, instability, ...).
class SpecError : public Error {
 public:
  explicit SpecError(const std::string& message)
      : Error("invalid_spec", message) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& message)
      : Error("parse_error", message) {}
};

class MissingDataError : public Error {
 public:
  explicit MissingDataError(const std::string& message)
      : Error("missing_data", message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("io_error", message) {}
};

}  // namespace ancestry
