#include "argmin/error.hpp"

namespace argmin {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return "invalid argument";
    case ErrorCode::kNonFinite:
      return "non-finite value";
    case ErrorCode::kShiftTooSmall:
      return "shift too small";
    case ErrorCode::kNoConvergence:
      return "no convergence";
    case ErrorCode::kDivergence:
      return "divergence";
    case ErrorCode::kLineSearchRunaway:
      return "line-search runaway";
    case ErrorCode::kDistanceUnavailable:
      return "distance unavailable";
    case ErrorCode::kEpochCap:
      return "epoch cap exceeded";
    case ErrorCode::kHalvingFailure:
      return "gradient failed to halve";
    case ErrorCode::kInsufficientRange:
      return "insufficient eps range";
    case ErrorCode::kConfig:
      return "config error";
    case ErrorCode::kIo:
      return "i/o error";
  }
  return "unknown";
}

bool is_algorithm_abort(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNoConvergence:
    case ErrorCode::kDivergence:
    case ErrorCode::kLineSearchRunaway:
    case ErrorCode::kEpochCap:
    case ErrorCode::kHalvingFailure:
    case ErrorCode::kShiftTooSmall:
    case ErrorCode::kNonFinite:
      return true;
    default:
      return false;
  }
}

}  // namespace argmin
