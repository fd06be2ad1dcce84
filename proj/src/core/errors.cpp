#include "errors.hpp"

namespace hamidx {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument:
      return "invalid_argument";
    case ErrorCode::config:
      return "config";
    case ErrorCode::catalog_miss:
      return "catalog_miss";
    case ErrorCode::structure_mismatch:
      return "structure_mismatch";
    case ErrorCode::propagation_failure:
      return "propagation_failure";
    case ErrorCode::numerical_integrity:
      return "numerical_integrity";
    case ErrorCode::precision:
      return "precision";
    case ErrorCode::index_unstable:
      return "index_unstable";
    case ErrorCode::internal_consistency:
      return "internal_consistency";
    case ErrorCode::range:
      return "range";
    case ErrorCode::domain:
      return "domain";
    case ErrorCode::equivalence_violation:
      return "equivalence_violation";
    case ErrorCode::insufficient_horizon:
      return "insufficient_horizon";
    case ErrorCode::precondition:
      return "precondition";
    case ErrorCode::io:
      return "io";
    case ErrorCode::lift_failure:
      return "lift_failure";
  }
  return "unknown";
}

}  // namespace hamidx
