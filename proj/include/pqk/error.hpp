#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pqk {

enum class ErrorCode {
  RankDeficient,
  DimensionMismatch,
  FrameMismatch,
  NotARightInverse,
  DegenerateG,
  MissingAction,
  WitnessInvalid,
  NotResolvable,
  NotPositiveDefinite,
  Divergent,
  OrderViolation,
  ExtentTooSmall,
  IncompatibleOverlap,
  MalformedInput,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pqk
