#pragma once

#include <stdexcept>
#include <string>

namespace wte {

enum class ErrorKind {
  invalid_argument,
  dimension_mismatch,
  solver_failure,
  not_psd,
  invalid_dissimilarity,
  degenerate_input,
  parse_error,
  io_error,
  unknown_label,
  incompatible_embedding,
};

const char* to_string(ErrorKind kind) noexcept;

/// Base error for the library. Every failure carries a kind so callers
/// (notably the CLI) can map it to an exit code without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Iterative solver hit its cap. `residual` is solver specific: the
/// off-diagonal norm for the eigensolver, the pivot count for OT.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double residual)
      : Error(ErrorKind::solver_failure, what), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class NotPsdError : public Error {
 public:
  NotPsdError(const std::string& what, double eigenvalue)
      : Error(ErrorKind::not_psd, what), eigenvalue_(eigenvalue) {}

  double eigenvalue() const noexcept { return eigenvalue_; }

 private:
  double eigenvalue_;
};

/// Malformed input file. `location` is a 1-based line for text formats and a
/// byte offset for binary formats.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t location)
      : Error(ErrorKind::parse_error, what), location_(location) {}

  std::size_t location() const noexcept { return location_; }

 private:
  std::size_t location_;
};

}  // namespace wte
