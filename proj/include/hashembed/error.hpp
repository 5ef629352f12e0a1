#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hashembed {

enum class ErrorCode {
  kInvalidConfig,
  kInvalidToken,
  kMaskOverflow,
  kCacheDisabled,
  kEmptyVocab,
  kIoError,
  kFormatError,
  kVocabMismatch,
};

std::string_view ToString(ErrorCode code);

/// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  /// Message without the error-code prefix that what() carries.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace hashembed
