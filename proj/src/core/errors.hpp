#pragma once

#include <stdexcept>
#include <string>

namespace hamidx {

// Numeric values are shared with the C API status codes.
enum class ErrorCode : int {
  invalid_argument = 1,
  config = 2,
  catalog_miss = 3,
  structure_mismatch = 4,
  propagation_failure = 5,
  numerical_integrity = 6,
  precision = 7,
  index_unstable = 8,
  internal_consistency = 9,
  range = 10,
  domain = 11,
  equivalence_violation = 12,
  insufficient_horizon = 13,
  precondition = 14,
  io = 15,
  lift_failure = 16,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class PropagationError : public Error {
 public:
  PropagationError(const std::string& what, double worst_residual)
      : Error(ErrorCode::propagation_failure, what), worst_residual_(worst_residual) {}
  double worst_residual() const noexcept { return worst_residual_; }

 private:
  double worst_residual_;
};

class PrecisionError : public Error {
 public:
  PrecisionError(const std::string& what, double time)
      : Error(ErrorCode::precision, what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

class IndexUnstableError : public Error {
 public:
  IndexUnstableError(const std::string& what, long first, long second)
      : Error(ErrorCode::index_unstable, what), first_(first), second_(second) {}
  long first() const noexcept { return first_; }
  long second() const noexcept { return second_; }

 private:
  long first_;
  long second_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) throw Error(code, what);
}

}  // namespace hamidx
