#include "strokeseg/error.hpp"

namespace strokeseg {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kConstantImage: return "ConstantImage";
    case ErrorCode::kEmptyDomain: return "EmptyDomain";
    case ErrorCode::kInfeasible: return "Infeasible";
    case ErrorCode::kDegenerateCluster: return "DegenerateCluster";
    case ErrorCode::kSingleCluster: return "SingleCluster";
    case ErrorCode::kEmptyBrain: return "EmptyBrain";
    case ErrorCode::kEmptySeeds: return "EmptySeeds";
    case ErrorCode::kDegenerateImage: return "DegenerateImage";
    case ErrorCode::kSingularTransform: return "SingularTransform";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kEmptyRoi: return "EmptyRoi";
    case ErrorCode::kUnregisteredCase: return "RefusesUnregisteredCase";
    case ErrorCode::kConfig: return "ConfigError";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kFormat: return "FormatError";
  }
  return "Unknown";
}

}  // namespace strokeseg
