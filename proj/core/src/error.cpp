#include "cited/error.hpp"

namespace cited {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::InfeasibleSplit: return "InfeasibleSplit";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::DegenerateWeight: return "DegenerateWeight";
    case ErrorCode::EmptyBoundary: return "EmptyBoundary";
    case ErrorCode::UnsortedIndices: return "UnsortedIndices";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::HypothesisViolated: return "HypothesisViolated";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::MissingArtifact: return "MissingArtifact";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace cited
