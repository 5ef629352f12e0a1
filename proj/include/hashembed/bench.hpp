#pragma once

// Embedding-stage latency harness. Measures only the cost of producing token
// embeddings (dynamic, cached, sparse, or a precomputed-table read); there is
// no encoder in the loop and tokenization is excluded from timing.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hashembed/hash_config.hpp"

namespace hashembed {

enum class BenchMode { kDynamic, kDynamicCache, kDynamicSparse, kTableLookup };

std::string_view ToString(BenchMode mode);
/// Throws Error(kInvalidConfig) for an unknown name.
BenchMode ParseBenchMode(std::string_view name);

enum class CorpusSource { kFile, kSynthetic };
enum class CorpusDistribution { kZipf, kUniform };

std::string_view ToString(CorpusDistribution distribution);
CorpusDistribution ParseCorpusDistribution(std::string_view name);

struct CorpusSpec {
  CorpusSource source = CorpusSource::kSynthetic;
  std::filesystem::path path;  // kFile: whitespace-separated tokens, one sentence per line
  CorpusDistribution distribution = CorpusDistribution::kZipf;
  std::size_t token_count = 10'000;
  double mean_token_length = 4.79;
  std::size_t vocab_size = 10'000;  // synthetic vocabulary the corpus draws from
  double zipf_exponent = 1.0;
  std::size_t sentence_length = 16;  // synthetic sentences are fixed-size chunks
  std::uint64_t seed = 0;
};

struct Corpus {
  std::vector<std::string> tokens;
  std::vector<std::size_t> sentence_ends;  // exclusive end index of each sentence
  std::string description;
};

/// Loads or generates a corpus. Throws Error(kIoError) for an unreadable
/// file and Error(kInvalidConfig) for an empty one or token_count == 0.
Corpus LoadCorpus(const CorpusSpec& spec);

/// Synthetic vocabulary: lowercase ASCII words whose length is 1 + Poisson
/// with the given overall mean.
std::vector<std::string> SyntheticVocabulary(std::size_t size, double mean_length,
                                             std::uint64_t seed);

struct BenchOptions {
  BenchMode mode = BenchMode::kDynamic;
  std::size_t warmup_iters = 1;
  std::size_t measure_iters = 3;
  std::size_t cache_capacity = 4096;
  std::uint32_t sparse_ones = 16;
  std::uint32_t sparse_k_max = 64;
  /// 0 times tokens one by one on the calling thread; > 0 times whole-corpus
  /// batches with that many workers.
  unsigned workers = 0;
};

struct BenchReport {
  BenchMode mode = BenchMode::kDynamic;
  std::uint64_t tokens_measured = 0;
  double per_token_mean_ns = 0.0;
  double per_token_median_ns = 0.0;
  double per_token_p99_ns = 0.0;
  double per_sentence_mean_ns = 0.0;
  std::uint64_t sentences = 0;
  std::optional<double> hit_rate;
  std::uint32_t dim = 0;
  std::uint32_t max_ngram = 0;
  std::uint64_t bucket = 0;
  std::uint64_t random_state = 0;
  std::uint32_t rolling_base = 0;
  std::optional<std::uint64_t> cache_capacity;
  std::optional<std::uint32_t> sparse_ones;
  std::string corpus;
  std::uint64_t warmup_iters = 0;
  std::uint64_t measure_iters = 0;
  std::uint32_t workers = 0;
  std::string scope;

  friend bool operator==(const BenchReport&, const BenchReport&) = default;
};

/// Throws Error(kInvalidConfig) when measure_iters == 0.
BenchReport RunBench(const Corpus& corpus, const HashConfig& config, const BenchOptions& options);
BenchReport RunBench(const CorpusSpec& corpus, const HashConfig& config,
                     const BenchOptions& options);

enum class ReportFormat { kJson, kTable };

/// JSON object with stable keys; hit_rate is omitted when no cache ran.
std::string EmitReport(const BenchReport& report, ReportFormat format);
/// JSON array, or one table row per report under a shared header.
std::string EmitReports(std::span<const BenchReport> reports, ReportFormat format);
/// Inverse of EmitReport(kJson). Throws Error(kFormatError) on bad input.
BenchReport ParseReportJson(std::string_view json);

}  // namespace hashembed
