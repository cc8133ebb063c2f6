#include "glomdet/errors.hpp"

namespace glomdet {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kUnreadableFile: return "UnreadableFile";
    case ErrorCode::kUnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::kOutOfBounds: return "OutOfBounds";
    case ErrorCode::kMalformedRle: return "MalformedRle";
    case ErrorCode::kDegenerateBox: return "DegenerateBox";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kSchemaViolation: return "SchemaViolation";
    case ErrorCode::kUnknownVersion: return "UnknownVersion";
    case ErrorCode::kBadGeometry: return "BadGeometry";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kInvariantViolation: return "InvariantViolation";
    case ErrorCode::kDomainError: return "DomainError";
    case ErrorCode::kMalformedDetectionFile: return "MalformedDetectionFile";
    case ErrorCode::kDetectorFailed: return "DetectorFailed";
    case ErrorCode::kEmptyTissue: return "EmptyTissue";
    case ErrorCode::kNoEvaluableSlides: return "NoEvaluableSlides";
  }
  return "Unknown";
}

bool is_io_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnreadableFile:
    case ErrorCode::kIoError:
    case ErrorCode::kDetectorFailed:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
      code_(code) {}

}  // namespace glomdet
