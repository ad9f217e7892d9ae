#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ostore {

enum class ErrorCode {
  kWrongItemSize,
  kMessageTooLarge,
  kInvalidRange,
  kPlaintextTooLarge,
  kAuthFailure,
  kMalformed,
  kKeyCollision,
  kCountMismatch,
  kMissIntolerance,
  kCacheOverflow,
  kCapacityExceeded,
  kRehashLoop,
  kInvalidConfig,
  kNormalizationBroken,
  kInsufficientSamples,
  kUnknownOpKind,
  kMissingRttEntry,
  kUnsupported,
};

std::string_view error_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ostore
