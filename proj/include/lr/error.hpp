#pragma once

#include <stdexcept>
#include <string>

namespace lr {

enum class ErrorCode {
  invalid_argument,
  dimension_mismatch,
  non_finite,
  singular_metric,
  degenerate,
  divergence,
  io,
  parse,
  step_underflow,
};

const char* to_string(ErrorCode code);

// Every failure raised by the library carries a machine-readable code; the
// CLI maps codes onto exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require_dims(long got, long expected, const char* what) {
  if (got != expected) {
    fail(ErrorCode::dimension_mismatch,
         std::string(what) + ": expected dimension " + std::to_string(expected) +
             ", got " + std::to_string(got));
  }
}

}  // namespace lr
