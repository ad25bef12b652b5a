#include "lr/error.hpp"

namespace lr {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument:
      return "invalid_argument";
    case ErrorCode::dimension_mismatch:
      return "dimension_mismatch";
    case ErrorCode::non_finite:
      return "non_finite";
    case ErrorCode::singular_metric:
      return "singular_metric";
    case ErrorCode::degenerate:
      return "degenerate";
    case ErrorCode::divergence:
      return "divergence";
    case ErrorCode::io:
      return "io";
    case ErrorCode::parse:
      return "parse";
    case ErrorCode::step_underflow:
      return "step_underflow";
  }
  return "unknown";
}

}  // namespace lr
