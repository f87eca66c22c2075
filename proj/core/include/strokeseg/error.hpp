#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace strokeseg {

enum class ErrorCode {
  kInvalidArgument,
  kConstantImage,
  kEmptyDomain,
  kInfeasible,
  kDegenerateCluster,
  kSingleCluster,
  kEmptyBrain,
  kEmptySeeds,
  kDegenerateImage,
  kSingularTransform,
  kDimensionMismatch,
  kEmptyRoi,
  kUnregisteredCase,
  kConfig,
  kIo,
  kFormat,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported with this exception type; callers that
// need to branch (sweeps recording invalid candidates, CLI exit codes)
// inspect code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace strokeseg
