#include "hashembed/error.hpp"

namespace hashembed {

std::string_view ToString(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kInvalidToken: return "InvalidToken";
    case ErrorCode::kMaskOverflow: return "MaskOverflow";
    case ErrorCode::kCacheDisabled: return "CacheDisabled";
    case ErrorCode::kEmptyVocab: return "EmptyVocab";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kFormatError: return "FormatError";
    case ErrorCode::kVocabMismatch: return "VocabMismatch";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(ToString(code)) + ": " + message),
      code_(code),
      message_(message) {}

}  // namespace hashembed
