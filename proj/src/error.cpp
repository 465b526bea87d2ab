#include "pqk/error.hpp"

namespace pqk {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::FrameMismatch: return "FrameMismatch";
    case ErrorCode::NotARightInverse: return "NotARightInverse";
    case ErrorCode::DegenerateG: return "DegenerateG";
    case ErrorCode::MissingAction: return "MissingAction";
    case ErrorCode::WitnessInvalid: return "WitnessInvalid";
    case ErrorCode::NotResolvable: return "NotResolvable";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::Divergent: return "Divergent";
    case ErrorCode::OrderViolation: return "OrderViolation";
    case ErrorCode::ExtentTooSmall: return "ExtentTooSmall";
    case ErrorCode::IncompatibleOverlap: return "IncompatibleOverlap";
    case ErrorCode::MalformedInput: return "MalformedInput";
  }
  return "Unknown";
}

}  // namespace pqk
