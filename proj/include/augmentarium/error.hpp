#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace augmentarium {

enum class ErrorCode {
  ParseError,
  DimensionMismatch,
  UnknownId,
  UnknownParent,
  InsufficientSamples,
  InvalidSizes,
  InvalidArgument,
  EmptyInput,
  EmptyLexicon,
  EmptyPool,
  MissingVector,
  MissingScore,
  TooFewRuns,
  NonFiniteLoss,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// True for numeric failures (the CLI maps these to a separate exit code).
  bool is_numeric() const noexcept { return code_ == ErrorCode::NonFiniteLoss; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::UnknownId: return "UnknownId";
    case ErrorCode::UnknownParent: return "UnknownParent";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::InvalidSizes: return "InvalidSizes";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::EmptyLexicon: return "EmptyLexicon";
    case ErrorCode::EmptyPool: return "EmptyPool";
    case ErrorCode::MissingVector: return "MissingVector";
    case ErrorCode::MissingScore: return "MissingScore";
    case ErrorCode::TooFewRuns: return "TooFewRuns";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::IoError: return "IoError";
  }
  return "Error";
}

}  // namespace augmentarium
