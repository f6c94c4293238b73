#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace urbanflow {

// Error classes map one-to-one onto CLI exit codes (see cli/exit_codes.hpp).
enum class ErrorKind {
  Config,
  Io,
  Parse,
  Constraint,
  Topology,
  Singular,
  NonConvergence,
  Instability,
  Internal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t byte_offset)
      : Error(ErrorKind::Parse, what), byte_offset_(byte_offset) {}

  std::size_t byte_offset() const noexcept { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

class SingularMatrixError : public Error {
 public:
  SingularMatrixError(const std::string& what, long pivot)
      : Error(ErrorKind::Singular, what), pivot_(pivot) {}

  /// Pivot (column) index at which factorization broke down, -1 if unknown.
  long pivot() const noexcept { return pivot_; }

 private:
  long pivot_;
};

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, std::vector<double> history)
      : Error(ErrorKind::NonConvergence, what), history_(std::move(history)) {}

  const std::vector<double>& residual_history() const noexcept { return history_; }

 private:
  std::vector<double> history_;
};

class InstabilityError : public Error {
 public:
  InstabilityError(const std::string& what, std::size_t step)
      : Error(ErrorKind::Instability, what), step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace urbanflow
