#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cited {

enum class ErrorCode {
  IndexOutOfRange,
  ShapeMismatch,
  InfeasibleSplit,
  EmptyMask,
  DegenerateWeight,
  EmptyBoundary,
  UnsortedIndices,
  DimMismatch,
  SizeMismatch,
  HypothesisViolated,
  InvalidArgument,
  ConfigInvalid,
  MissingArtifact,
  ParseError,
  InvariantViolation,
};

std::string_view to_string(ErrorCode code);

/// All library failures are reported as cited::Error carrying a code that
/// callers (and the CLI exit-code mapping) can switch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace cited
