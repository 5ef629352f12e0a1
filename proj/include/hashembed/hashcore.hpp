#pragma once

// Pure building blocks of the n-gram pooling hash: seed generation, i-gram
// rolling-hash signatures, seed partitioning, projection with bounding, and
// mean pooling. Nothing here holds state.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace hashembed {

/// Standard SplitMix64 finalizer applied to `x` (adds the golden-ratio
/// increment first).
constexpr std::uint64_t SplitMix64(std::uint64_t x) noexcept {
  std::uint64_t z = x + 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

struct SeedVector {
  std::vector<std::uint64_t> values;
};

/// Seed j is SplitMix64(random_state + j) mod bucket.
SeedVector GenerateHashSeeds(std::uint64_t random_state, std::uint32_t dim,
                             std::uint64_t bucket);

/// Signatures of every i-byte window of a token, left to right.
struct SignatureVector {
  std::uint32_t ngram = 0;
  std::vector<std::uint64_t> values;
};

/// Polynomial rolling hash of each `ngram`-byte window:
/// (sum_j c_j * base^(ngram - j)) mod bucket over the raw bytes. Returns an
/// empty vector when the token is shorter than `ngram`. Throws
/// Error(kInvalidToken) on an empty token.
SignatureVector NgramSignatures(std::string_view token_bytes, std::uint32_t ngram,
                                std::uint64_t rolling_base, std::uint64_t bucket);

/// Partition sizes d_1..d_N: floor(d*i/T) with T = N(N+1)/2, remainder to d_N.
/// Throws Error(kInvalidConfig) when dim < max_ngram.
std::vector<std::uint32_t> PartitionDims(std::uint32_t dim, std::uint32_t max_ngram);

/// Contiguous slices of the seed vector, one per n-gram size.
struct SeedPartition {
  std::vector<std::uint32_t> dims;
  std::vector<std::uint32_t> offsets;

  std::size_t size() const noexcept { return dims.size(); }
  std::span<const std::uint64_t> Slice(const SeedVector& seeds, std::size_t part) const;
};

SeedPartition MakeSeedPartition(std::uint32_t dim, std::uint32_t max_ngram);

/// (a * b) mod m without overflow for any 64-bit operands.
std::uint64_t MulMod(std::uint64_t a, std::uint64_t b, std::uint64_t m) noexcept;

/// Maps a residue r in [0, bucket) to (-1, 1]: residues above bucket/2 (as a
/// real number) are shifted down by bucket, then everything is divided by
/// bucket/2.
double BoundResidue(std::uint64_t residue, std::uint64_t bucket) noexcept;

/// Row-major k x d_i matrix of bounded projections.
struct BoundedProjection {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  std::span<const double> Row(std::size_t r) const {
    return std::span<const double>(values).subspan(r * cols, cols);
  }
};

/// Bounded projection of one signature against a seed slice, written to `out`
/// (out.size() must equal seeds.size()).
void ProjectRow(std::uint64_t signature, std::span<const std::uint64_t> seeds,
                std::uint64_t bucket, std::span<double> out) noexcept;

/// Outer product of signatures and seeds, reduced mod bucket and bounded.
BoundedProjection ProjectAndBound(std::span<const std::uint64_t> signatures,
                                  std::span<const std::uint64_t> seeds,
                                  std::uint64_t bucket);

/// Column-wise mean; rows are summed in ascending order. Requires rows >= 1.
std::vector<double> PoolMean(const BoundedProjection& projection);

}  // namespace hashembed
