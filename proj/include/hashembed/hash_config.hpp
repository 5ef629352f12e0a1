#pragma once

#include <cstdint>
#include <string>

namespace hashembed {

enum class ShortTokenPolicy {
  // A partition whose i-gram set is empty contributes a zero vector.
  kZeroFill,
};

/// Hyperparameters of the n-gram pooling hash. Equal configs produce
/// bit-identical embeddings.
struct HashConfig {
  std::uint32_t dim = 768;
  std::uint32_t max_ngram = 3;
  std::uint64_t bucket = 1'000'000'007ULL;
  std::uint64_t random_state = 0;
  std::uint32_t rolling_base = 257;
  ShortTokenPolicy short_token_policy = ShortTokenPolicy::kZeroFill;
  bool pad_token_zero = false;
  std::string pad_token = "[PAD]";
  bool strip_wordpiece_prefix = false;

  /// Throws Error(kInvalidConfig) unless dim >= max_ngram >= 1, bucket >= 2
  /// and rolling_base >= 2.
  void Validate() const;

  friend bool operator==(const HashConfig&, const HashConfig&) = default;
};

}  // namespace hashembed
