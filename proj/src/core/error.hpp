#pragma once

#include <stdexcept>
#include <string>

namespace vbvar {

// Numeric values are mirrored by vbvar_status in the C header.
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kDimensionMismatch = 2,
  kNotPositiveDefinite = 3,
  kDomain = 4,
  kUndefinedMoment = 5,
  kParse = 6,
  kMissingValue = 7,
  kEmptyData = 8,
  kInsufficientObservations = 9,
  kSingularSystem = 10,
  kNotConverged = 11,
  kTooFewDraws = 12,
  kIo = 13,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace vbvar
