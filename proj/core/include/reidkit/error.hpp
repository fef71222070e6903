#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace reidkit {

/// Distinguishes the failure modes callers (and tests) need to tell apart.
enum class ErrorCode {
  kInvalidArgument,
  kEmptyDomain,
  kIo,
  kMagicMismatch,
  kVersionMismatch,
  kBlobLengthMismatch,
  kNonFiniteValue,
  kDuplicateRecordId,
  kRowOutOfRange,
  kMalformedMetadata,
  kDimensionMismatch,
  kEmptyMask,
  kDegenerateStd,
  kInsufficientIdentities,
  kNoValidQueries,
  kEmptyGallery,
  kConfig,
  kImageDecode,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace reidkit
