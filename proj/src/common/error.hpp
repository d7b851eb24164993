#pragma once

#include <stdexcept>
#include <string>

namespace gccnmf {

// Mirrors gcn_status in the C header; keep the numeric values in sync.
enum class ErrorCode : int {
  kInvalidParameter = 1,
  kInvalidInput = 2,
  kIo = 3,
  kMalformedHeader = 4,
  kUnsupportedCodec = 5,
  kTruncated = 6,
  kVersionMismatch = 7,
  kCorrupted = 8,
  kInvariantViolation = 9,
  kConfigMismatch = 10,
  kEmptyInput = 11,
  kBufferTooSmall = 12,
  kPortBusy = 13,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

// Floor used wherever the algorithms divide by a reconstruction or magnitude.
inline constexpr double kEps = 1e-12;

}  // namespace gccnmf
