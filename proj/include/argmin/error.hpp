#pragma once

#include <stdexcept>
#include <string>

namespace argmin {

/// Failure categories surfaced by the library. The CLI maps these onto exit codes.
enum class ErrorCode {
  kInvalidArgument,
  kNonFinite,
  kShiftTooSmall,
  kNoConvergence,
  kDivergence,
  kLineSearchRunaway,
  kDistanceUnavailable,
  kEpochCap,
  kHalvingFailure,
  kInsufficientRange,
  kConfig,
  kIo,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

/// True for errors raised by an algorithm while running (as opposed to bad input).
bool is_algorithm_abort(ErrorCode code);

}  // namespace argmin
