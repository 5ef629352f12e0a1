#include "hashembed/sparse_mask.hpp"

#include <algorithm>
#include <numeric>

#include "hashembed/error.hpp"

namespace hashembed {

namespace {

// Separates the mask stream from the seed stream for the same random state.
constexpr std::uint64_t kMaskSalt = 0x6D61736B2D636F6CULL;

}  // namespace

SparseMask::SparseMask(std::uint64_t random_state, const SeedPartition& partition,
                       std::uint32_t ones, std::uint32_t k_max)
    : ones_(ones), k_max_(k_max) {
  if (ones == 0) {
    throw Error(ErrorCode::kInvalidConfig, "sparse mask needs at least one column per row");
  }
  if (k_max == 0) {
    throw Error(ErrorCode::kInvalidConfig, "sparse mask k_max must be >= 1");
  }
  const std::uint64_t stream = SplitMix64(random_state ^ kMaskSalt);
  std::vector<std::uint32_t> scratch;
  for (std::size_t p = 0; p < partition.size(); ++p) {
    const std::uint32_t width = partition.dims[p];
    const std::uint32_t take = std::min(ones, width);
    row_width_.push_back(take);
    part_offset_.push_back(columns_.size());
    scratch.resize(width);
    for (std::uint32_t slot = 0; slot < k_max; ++slot) {
      const std::uint64_t row_seed = SplitMix64(stream + p * std::uint64_t{k_max} + slot);
      std::iota(scratch.begin(), scratch.end(), 0U);
      // Partial Fisher-Yates: the first `take` entries become the selection.
      for (std::uint32_t t = 0; t < take; ++t) {
        const std::uint64_t r = SplitMix64(row_seed + t) % (width - t);
        std::swap(scratch[t], scratch[t + r]);
      }
      std::sort(scratch.begin(), scratch.begin() + take);
      columns_.insert(columns_.end(), scratch.begin(), scratch.begin() + take);
    }
  }
}

std::span<const std::uint32_t> SparseMask::Columns(std::size_t part, std::size_t slot) const {
  const std::size_t width = row_width_[part];
  return std::span<const std::uint32_t>(columns_).subspan(part_offset_[part] + slot * width,
                                                          width);
}

}  // namespace hashembed
