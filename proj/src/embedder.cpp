#include "hashembed/embedder.hpp"

#include <algorithm>
#include <exception>
#include <thread>

#include "hashembed/error.hpp"

namespace hashembed {

namespace {

constexpr std::string_view kWordPiecePrefix = "##";

}  // namespace

Embedder::Embedder(HashConfig config, EmbedderOptions options)
    : config_(std::move(config)) {
  config_.Validate();
  seeds_ = GenerateHashSeeds(config_.random_state, config_.dim, config_.bucket);
  partition_ = MakeSeedPartition(config_.dim, config_.max_ngram);
  if (options.cache_capacity) {
    cache_ = std::make_unique<NGramCache>(*options.cache_capacity);
  }
  if (options.sparse_ones) {
    sparse_.emplace(config_.random_state, partition_, *options.sparse_ones,
                    options.sparse_k_max);
  }
}

std::optional<std::string_view> Embedder::Normalize(std::string_view token) const {
  if (config_.pad_token_zero && token == config_.pad_token) return std::nullopt;
  if (config_.strip_wordpiece_prefix && token.starts_with(kWordPiecePrefix)) {
    token.remove_prefix(kWordPiecePrefix.size());
  }
  if (token.empty()) {
    throw Error(ErrorCode::kInvalidToken, "empty token");
  }
  return token;
}

std::vector<double> Embedder::Embed(std::string_view token) const {
  std::vector<double> out(config_.dim);
  EmbedInto(token, out);
  return out;
}

void Embedder::EmbedInto(std::string_view token, std::span<double> out) const {
  if (out.size() != config_.dim) std::abort();
  const auto bytes = Normalize(token);
  std::fill(out.begin(), out.end(), 0.0);
  if (!bytes) return;

  std::vector<double> scratch;
  for (std::size_t p = 0; p < partition_.size(); ++p) {
    const auto ngram = static_cast<std::uint32_t>(p + 1);
    const SignatureVector sig =
        NgramSignatures(*bytes, ngram, config_.rolling_base, config_.bucket);
    if (sig.values.empty()) continue;  // ZeroFill

    const auto seeds = partition_.Slice(seeds_, p);
    const auto acc = out.subspan(partition_.offsets[p], partition_.dims[p]);
    scratch.resize(seeds.size());
    for (std::size_t w = 0; w < sig.values.size(); ++w) {
      std::span<const double> row;
      NGramCache::Row cached;
      if (cache_) {
        const std::string_view window = bytes->substr(w, ngram);
        cached = cache_->Lookup(ngram, window);
        if (!cached) {
          auto fresh = std::make_shared<std::vector<double>>(seeds.size());
          ProjectRow(sig.values[w], seeds, config_.bucket, *fresh);
          cached = std::move(fresh);
          cache_->Insert(ngram, window, cached);
        }
        row = *cached;
      } else {
        ProjectRow(sig.values[w], seeds, config_.bucket, scratch);
        row = scratch;
      }
      for (std::size_t c = 0; c < acc.size(); ++c) acc[c] += row[c];
    }
    const double k = static_cast<double>(sig.values.size());
    for (double& v : acc) v /= k;
  }
}

void Embedder::CheckSparseFits(std::string_view bytes) const {
  // The 1-gram count is the largest window count of any n-gram size.
  if (bytes.size() > sparse_->k_max()) {
    throw Error(ErrorCode::kMaskOverflow,
                "token has " + std::to_string(bytes.size()) +
                    " windows, sparse mask covers " + std::to_string(sparse_->k_max()));
  }
}

std::vector<double> Embedder::EmbedSparse(std::string_view token) const {
  std::vector<double> out(config_.dim);
  EmbedSparseInto(token, out);
  return out;
}

void Embedder::EmbedSparseInto(std::string_view token, std::span<double> out) const {
  if (!sparse_) {
    throw Error(ErrorCode::kInvalidConfig, "embedder was built without a sparse mask");
  }
  if (out.size() != config_.dim) std::abort();
  const auto bytes = Normalize(token);
  std::fill(out.begin(), out.end(), 0.0);
  if (!bytes) return;
  CheckSparseFits(*bytes);

  for (std::size_t p = 0; p < partition_.size(); ++p) {
    const auto ngram = static_cast<std::uint32_t>(p + 1);
    const SignatureVector sig =
        NgramSignatures(*bytes, ngram, config_.rolling_base, config_.bucket);
    if (sig.values.empty()) continue;

    const auto seeds = partition_.Slice(seeds_, p);
    const auto acc = out.subspan(partition_.offsets[p], partition_.dims[p]);
    for (std::size_t w = 0; w < sig.values.size(); ++w) {
      for (std::uint32_t c : sparse_->Columns(p, w)) {
        acc[c] += BoundResidue(MulMod(sig.values[w], seeds[c], config_.bucket),
                               config_.bucket);
      }
    }
    const double k = static_cast<double>(sig.values.size());
    for (double& v : acc) v /= k;
  }
}

EmbeddingMatrix Embedder::EmbedBatch(std::span<const std::string> tokens,
                                     BatchOptions options) const {
  if (options.sparse && !sparse_) {
    throw Error(ErrorCode::kInvalidConfig, "embedder was built without a sparse mask");
  }
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    try {
      const auto bytes = Normalize(tokens[t]);
      if (options.sparse && bytes) CheckSparseFits(*bytes);
    } catch (const Error& e) {
      throw Error(e.code(), "token at index " + std::to_string(t) + ": " + e.message());
    }
  }

  EmbeddingMatrix m;
  m.rows = tokens.size();
  m.cols = config_.dim;
  m.values.resize(m.rows * m.cols);

  auto run_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) {
      std::span<double> row(m.values.data() + t * m.cols, m.cols);
      if (options.sparse) {
        EmbedSparseInto(tokens[t], row);
      } else {
        EmbedInto(tokens[t], row);
      }
    }
  };

  unsigned workers = options.workers == 0 ? std::thread::hardware_concurrency() : options.workers;
  workers = std::max(1U, std::min<unsigned>(workers, static_cast<unsigned>(m.rows)));
  if (workers <= 1) {
    run_range(0, m.rows);
    return m;
  }

  std::vector<std::exception_ptr> failures(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (m.rows + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t begin = std::min(m.rows, w * chunk);
      const std::size_t end = std::min(m.rows, begin + chunk);
      pool.emplace_back([&, w, begin, end] {
        try {
          run_range(begin, end);
        } catch (...) {
          failures[w] = std::current_exception();
        }
      });
    }
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return m;
}

CacheStats Embedder::cache_stats() const {
  if (!cache_) {
    throw Error(ErrorCode::kCacheDisabled, "embedder was built without a cache");
  }
  return cache_->stats();
}

}  // namespace hashembed
