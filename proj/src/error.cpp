#include "dfs/error.hpp"

namespace dfs {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kDimensionMismatch: return "dimension mismatch";
    case ErrorCode::kState: return "invalid state";
    case ErrorCode::kShapeMismatch: return "shape mismatch";
    case ErrorCode::kClassOverlap: return "seen/unseen overlap";
    case ErrorCode::kLeakage: return "unseen-class leakage";
    case ErrorCode::kNonFinite: return "non-finite value";
    case ErrorCode::kLabelRange: return "label out of range";
    case ErrorCode::kFormat: return "format error";
    case ErrorCode::kVersionMismatch: return "version mismatch";
    case ErrorCode::kTruncated: return "truncated blob";
    case ErrorCode::kIo: return "i/o error";
    case ErrorCode::kNumeric: return "numeric failure";
  }
  return "unknown";
}

bool is_data_error(ErrorCode code) {
  return code != ErrorCode::kNumeric;
}

void fail(ErrorCode code, const std::string& what) {
  throw Error(code, std::string(to_string(code)) + ": " + what);
}

}  // namespace dfs
