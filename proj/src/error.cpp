#include "wte/error.hpp"

namespace wte {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid argument";
    case ErrorKind::dimension_mismatch: return "dimension mismatch";
    case ErrorKind::solver_failure: return "solver failure";
    case ErrorKind::not_psd: return "matrix not positive semidefinite";
    case ErrorKind::invalid_dissimilarity: return "invalid dissimilarity";
    case ErrorKind::degenerate_input: return "degenerate input";
    case ErrorKind::parse_error: return "parse error";
    case ErrorKind::io_error: return "i/o error";
    case ErrorKind::unknown_label: return "unknown label";
    case ErrorKind::incompatible_embedding: return "incompatible embedding";
  }
  return "unknown error";
}

}  // namespace wte
