#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hashembed/hashcore.hpp"

namespace hashembed {

/// Fixed per-window column selection for the sparse projection path. For
/// partition p and window slot j < k_max it holds min(ones, d_p) distinct
/// column indices (relative to the partition, ascending), derived from the
/// random state alone.
class SparseMask {
 public:
  /// Throws Error(kInvalidConfig) when ones == 0 or k_max == 0.
  SparseMask(std::uint64_t random_state, const SeedPartition& partition,
             std::uint32_t ones, std::uint32_t k_max);

  std::uint32_t ones() const noexcept { return ones_; }
  std::uint32_t k_max() const noexcept { return k_max_; }

  /// Number of columns selected per row in partition `part`.
  std::uint32_t OnesIn(std::size_t part) const noexcept { return row_width_[part]; }

  std::span<const std::uint32_t> Columns(std::size_t part, std::size_t slot) const;

  /// Total stored column indices; O(k_max * ones) per partition.
  std::size_t StoredIndices() const noexcept { return columns_.size(); }

 private:
  std::uint32_t ones_;
  std::uint32_t k_max_;
  std::vector<std::uint32_t> row_width_;
  std::vector<std::size_t> part_offset_;
  std::vector<std::uint32_t> columns_;
};

}  // namespace hashembed
