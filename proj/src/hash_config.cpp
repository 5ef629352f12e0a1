#include "hashembed/hash_config.hpp"

#include "hashembed/error.hpp"

namespace hashembed {

void HashConfig::Validate() const {
  if (max_ngram < 1) {
    throw Error(ErrorCode::kInvalidConfig, "max n-gram size must be >= 1");
  }
  if (dim < max_ngram) {
    throw Error(ErrorCode::kInvalidConfig,
                "dim (" + std::to_string(dim) + ") must be >= max n-gram size (" +
                    std::to_string(max_ngram) + ")");
  }
  if (bucket < 2) {
    throw Error(ErrorCode::kInvalidConfig, "bucket size must be >= 2");
  }
  if (rolling_base < 2) {
    throw Error(ErrorCode::kInvalidConfig, "rolling base must be >= 2");
  }
}

}  // namespace hashembed
