#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace glomdet {

enum class ErrorCode {
  kInvalidArgument,
  kUnreadableFile,
  kUnsupportedFormat,
  kOutOfBounds,
  kMalformedRle,
  kDegenerateBox,
  kDimensionMismatch,
  kSchemaViolation,
  kUnknownVersion,
  kBadGeometry,
  kIoError,
  kInvariantViolation,
  kDomainError,
  kMalformedDetectionFile,
  kDetectorFailed,
  kEmptyTissue,
  kNoEvaluableSlides,
};

std::string_view error_code_name(ErrorCode code);

// Failures caused by the environment (files, external processes) as opposed
// to bad input values. The CLI maps these to exit code 2.
bool is_io_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace glomdet
