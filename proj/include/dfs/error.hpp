#pragma once

#include <stdexcept>
#include <string>

namespace dfs {

enum class ErrorCode {
  kInvalidArgument,
  kDimensionMismatch,
  kState,
  // dataset / file errors
  kShapeMismatch,
  kClassOverlap,
  kLeakage,
  kNonFinite,
  kLabelRange,
  kFormat,
  kVersionMismatch,
  kTruncated,
  kIo,
  // training
  kNumeric,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// True for errors caused by bad input data or files rather than by training
// diverging.
bool is_data_error(ErrorCode code);

[[noreturn]] void fail(ErrorCode code, const std::string& what);

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) fail(code, what);
}

}  // namespace dfs
