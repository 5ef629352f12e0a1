#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hashembed/hash_config.hpp"
#include "hashembed/hashcore.hpp"
#include "hashembed/ngram_cache.hpp"
#include "hashembed/sparse_mask.hpp"

namespace hashembed {

/// Row-major |tokens| x dim matrix.
struct EmbeddingMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  std::span<const double> Row(std::size_t r) const {
    return std::span<const double>(values).subspan(r * cols, cols);
  }
};

struct EmbedderOptions {
  /// Enables the n-gram row cache with this many entries.
  std::optional<std::size_t> cache_capacity;
  /// Enables the sparse path with this many ones per mask row.
  std::optional<std::uint32_t> sparse_ones;
  std::uint32_t sparse_k_max = 64;
};

struct BatchOptions {
  /// 0 picks std::thread::hardware_concurrency().
  unsigned workers = 0;
  bool sparse = false;
};

/// Computes token embeddings on the fly from a HashConfig. Outputs are a pure
/// function of (token, config, mask); the optional cache only memoizes.
class Embedder {
 public:
  /// Throws Error(kInvalidConfig) for an invalid config or options.
  explicit Embedder(HashConfig config, EmbedderOptions options = {});

  Embedder(Embedder&&) noexcept = default;
  Embedder& operator=(Embedder&&) noexcept = default;

  const HashConfig& config() const noexcept { return config_; }
  const SeedVector& seeds() const noexcept { return seeds_; }
  const SeedPartition& partition() const noexcept { return partition_; }
  std::uint32_t dim() const noexcept { return config_.dim; }
  bool has_cache() const noexcept { return cache_ != nullptr; }
  const SparseMask* sparse_mask() const noexcept { return sparse_ ? &*sparse_ : nullptr; }

  std::vector<double> Embed(std::string_view token) const;
  void EmbedInto(std::string_view token, std::span<double> out) const;

  /// Sparse projection path. Throws Error(kInvalidConfig) without a mask and
  /// Error(kMaskOverflow) when a token has more than k_max windows.
  std::vector<double> EmbedSparse(std::string_view token) const;
  void EmbedSparseInto(std::string_view token, std::span<double> out) const;

  /// Row t is bit-identical to Embed(tokens[t]) (or EmbedSparse). Every
  /// token is validated before any row is computed; errors name the index.
  EmbeddingMatrix EmbedBatch(std::span<const std::string> tokens,
                             BatchOptions options = {}) const;

  /// Throws Error(kCacheDisabled) when built without a cache.
  CacheStats cache_stats() const;

 private:
  // Returns the bytes to hash, or nullopt for the zeroed pad token.
  std::optional<std::string_view> Normalize(std::string_view token) const;
  void CheckSparseFits(std::string_view bytes) const;

  HashConfig config_;
  SeedVector seeds_;
  SeedPartition partition_;
  std::unique_ptr<NGramCache> cache_;
  std::optional<SparseMask> sparse_;
};

}  // namespace hashembed
