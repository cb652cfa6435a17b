#include "sipkit/error.hpp"

namespace sipkit {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::DecodeError: return "DecodeError";
    case ErrorCode::DegenerateImage: return "DegenerateImage";
    case ErrorCode::ImageTooSmall: return "ImageTooSmall";
    case ErrorCode::InsufficientEdges: return "InsufficientEdges";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteData: return "NonFiniteData";
    case ErrorCode::RankError: return "RankError";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::SingularDesign: return "SingularDesign";
    case ErrorCode::DegenerateLabels: return "DegenerateLabels";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::ScaleViolation: return "ScaleViolation";
    case ErrorCode::MissingImage: return "MissingImage";
    case ErrorCode::ZeroWidthScale: return "ZeroWidthScale";
    case ErrorCode::AlignmentError: return "AlignmentError";
    case ErrorCode::MissingActivations: return "MissingActivations";
    case ErrorCode::RunFailed: return "RunFailed";
  }
  return "Unknown";
}

}  // namespace sipkit
