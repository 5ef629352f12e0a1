#include "hashembed/hashcore.hpp"

#include <cassert>
#include <cstdlib>

#include "hashembed/error.hpp"

namespace hashembed {

namespace {

__extension__ using Uint128 = unsigned __int128;

constexpr std::uint64_t kFitsSingleWord = std::uint64_t{1} << 32;

}  // namespace

SeedVector GenerateHashSeeds(std::uint64_t random_state, std::uint32_t dim,
                             std::uint64_t bucket) {
  SeedVector seeds;
  seeds.values.resize(dim);
  for (std::uint32_t j = 0; j < dim; ++j) {
    seeds.values[j] = SplitMix64(random_state + j) % bucket;
  }
  return seeds;
}

std::uint64_t MulMod(std::uint64_t a, std::uint64_t b, std::uint64_t m) noexcept {
  if (a < kFitsSingleWord && b < kFitsSingleWord) {
    return (a * b) % m;
  }
  return static_cast<std::uint64_t>((static_cast<Uint128>(a) * b) % m);
}

SignatureVector NgramSignatures(std::string_view token_bytes, std::uint32_t ngram,
                                std::uint64_t rolling_base, std::uint64_t bucket) {
  if (token_bytes.empty()) {
    throw Error(ErrorCode::kInvalidToken, "cannot hash an empty token");
  }
  assert(ngram >= 1 && bucket >= 2);
  SignatureVector sig;
  sig.ngram = ngram;
  const std::size_t len = token_bytes.size();
  if (len < ngram) return sig;
  const std::size_t windows = len - ngram + 1;
  sig.values.reserve(windows);

  const std::uint64_t base = rolling_base % bucket;
  auto byte_at = [&](std::size_t pos) -> std::uint64_t {
    return static_cast<std::uint64_t>(static_cast<unsigned char>(token_bytes[pos])) % bucket;
  };

  // base^(ngram-1) weights the byte that leaves the window.
  std::uint64_t lead_weight = 1 % bucket;
  for (std::uint32_t j = 1; j < ngram; ++j) lead_weight = MulMod(lead_weight, base, bucket);

  std::uint64_t h = 0;
  for (std::uint32_t j = 0; j < ngram; ++j) {
    h = (MulMod(h, base, bucket) + byte_at(j)) % bucket;
  }
  sig.values.push_back(h);
  for (std::size_t start = 1; start < windows; ++start) {
    const std::uint64_t outgoing = MulMod(byte_at(start - 1), lead_weight, bucket);
    h = (h + bucket - outgoing) % bucket;
    h = (MulMod(h, base, bucket) + byte_at(start + ngram - 1)) % bucket;
    sig.values.push_back(h);
  }
  return sig;
}

std::vector<std::uint32_t> PartitionDims(std::uint32_t dim, std::uint32_t max_ngram) {
  if (max_ngram < 1 || dim < max_ngram) {
    throw Error(ErrorCode::kInvalidConfig,
                "cannot partition dim " + std::to_string(dim) + " into " +
                    std::to_string(max_ngram) + " n-gram slices");
  }
  const std::uint64_t total = std::uint64_t{max_ngram} * (max_ngram + 1) / 2;
  std::vector<std::uint32_t> dims(max_ngram);
  std::uint64_t used = 0;
  for (std::uint32_t i = 1; i < max_ngram; ++i) {
    dims[i - 1] = static_cast<std::uint32_t>(std::uint64_t{dim} * i / total);
    used += dims[i - 1];
  }
  dims[max_ngram - 1] = static_cast<std::uint32_t>(dim - used);
  return dims;
}

std::span<const std::uint64_t> SeedPartition::Slice(const SeedVector& seeds,
                                                    std::size_t part) const {
  return std::span<const std::uint64_t>(seeds.values).subspan(offsets[part], dims[part]);
}

SeedPartition MakeSeedPartition(std::uint32_t dim, std::uint32_t max_ngram) {
  SeedPartition partition;
  partition.dims = PartitionDims(dim, max_ngram);
  partition.offsets.reserve(partition.dims.size());
  std::uint32_t offset = 0;
  for (std::uint32_t d : partition.dims) {
    partition.offsets.push_back(offset);
    offset += d;
  }
  return partition;
}

double BoundResidue(std::uint64_t residue, std::uint64_t bucket) noexcept {
  const double half = static_cast<double>(bucket) / 2.0;
  // residue > bucket/2  <=>  residue > bucket - residue, exact in integers.
  if (residue > bucket - residue) {
    return -static_cast<double>(bucket - residue) / half;
  }
  return static_cast<double>(residue) / half;
}

void ProjectRow(std::uint64_t signature, std::span<const std::uint64_t> seeds,
                std::uint64_t bucket, std::span<double> out) noexcept {
  assert(out.size() == seeds.size());
  for (std::size_t c = 0; c < seeds.size(); ++c) {
    out[c] = BoundResidue(MulMod(signature, seeds[c], bucket), bucket);
  }
}

BoundedProjection ProjectAndBound(std::span<const std::uint64_t> signatures,
                                  std::span<const std::uint64_t> seeds,
                                  std::uint64_t bucket) {
  BoundedProjection p;
  p.rows = signatures.size();
  p.cols = seeds.size();
  p.values.resize(p.rows * p.cols);
  for (std::size_t r = 0; r < p.rows; ++r) {
    ProjectRow(signatures[r], seeds, bucket,
               std::span<double>(p.values).subspan(r * p.cols, p.cols));
  }
  return p;
}

std::vector<double> PoolMean(const BoundedProjection& projection) {
  if (projection.rows == 0) std::abort();
  std::vector<double> mean(projection.cols, 0.0);
  for (std::size_t r = 0; r < projection.rows; ++r) {
    const auto row = projection.Row(r);
    for (std::size_t c = 0; c < projection.cols; ++c) mean[c] += row[c];
  }
  const double k = static_cast<double>(projection.rows);
  for (double& v : mean) v /= k;
  return mean;
}

}  // namespace hashembed
