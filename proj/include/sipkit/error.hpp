#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sipkit {

enum class ErrorCode {
  IoError,
  DecodeError,
  DegenerateImage,
  ImageTooSmall,
  InsufficientEdges,
  FormatError,
  TruncatedFile,
  DimensionMismatch,
  NonFiniteData,
  RankError,
  LengthMismatch,
  InvalidArgument,
  SingularDesign,
  DegenerateLabels,
  SchemaError,
  ScaleViolation,
  MissingImage,
  ZeroWidthScale,
  AlignmentError,
  MissingActivations,
  RunFailed,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported through this exception; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sipkit
