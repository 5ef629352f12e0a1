#include "hashembed/selfcheck.hpp"

#include <algorithm>
#include <functional>
#include <random>
#include <sstream>

#include "hashembed/bench.hpp"
#include "hashembed/embedder.hpp"
#include "hashembed/hashcore.hpp"

namespace hashembed {

namespace {

void AppendUtf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

CheckResult CheckBoundedness(const SelfcheckOptions& options) {
  HashConfig config;
  config.random_state = options.seed;
  const Embedder embedder(config);
  const double scale = options.fault == SelfcheckFault::kBounding ? 2.5 : 1.0;
  const auto tokens = RandomUtf8Tokens(options.bounded_tokens, 1, 32, options.seed);
  std::vector<double> e(config.dim);
  std::size_t violations = 0;
  for (const auto& tok : tokens) {
    embedder.EmbedInto(tok, e);
    for (double v : e) {
      v *= scale;
      if (!(v > -1.0 && v <= 1.0)) ++violations;
    }
  }
  std::ostringstream detail;
  detail << tokens.size() << " tokens at d=" << config.dim << ", " << violations
         << " components outside (-1, 1]";
  return {"boundedness", violations == 0, detail.str()};
}

CheckResult CheckMultisetInvariance(const SelfcheckOptions& options) {
  HashConfig config;
  config.random_state = options.seed;
  const Embedder embedder(config);
  const auto ab = embedder.Embed("ab");
  const auto ba = embedder.Embed("ba");
  const std::size_t d1 = embedder.partition().dims[0];
  const bool unigram_equal = std::equal(ab.begin(), ab.begin() + d1, ba.begin());
  const bool full_differs = ab != ba;
  std::string detail = std::string("e_1(ab) ") + (unigram_equal ? "==" : "!=") +
                       " e_1(ba); full vectors " + (full_differs ? "differ" : "are equal");
  return {"multiset_invariance", unigram_equal && full_differs, detail};
}

CheckResult CheckCacheTransparency(const SelfcheckOptions& options) {
  HashConfig config;
  config.random_state = options.seed;
  CorpusSpec spec;
  spec.token_count = 2000;
  spec.seed = options.seed;
  const Corpus corpus = LoadCorpus(spec);
  const Embedder plain(config);
  EmbedderOptions with_cache;
  with_cache.cache_capacity = 512;
  const Embedder cached(config, with_cache);
  const auto a = plain.EmbedBatch(corpus.tokens, {.workers = 1});
  const auto b = cached.EmbedBatch(corpus.tokens, {.workers = 1});
  const bool same = a.values == b.values;
  std::ostringstream detail;
  detail << corpus.tokens.size() << " zipf tokens, capacity 512, hit_rate "
         << cached.cache_stats().hit_rate << (same ? ", identical" : ", outputs differ");
  return {"cache_transparency", same, detail.str()};
}

CheckResult CheckSparseFullMask(const SelfcheckOptions& options) {
  HashConfig config;
  config.random_state = options.seed;
  const auto dims = PartitionDims(config.dim, config.max_ngram);
  const std::uint32_t widest = *std::max_element(dims.begin(), dims.end());
  EmbedderOptions full_mask;
  full_mask.sparse_ones = widest;
  const Embedder embedder(config, full_mask);
  const auto tokens = RandomUtf8Tokens(500, 1, 32, options.seed + 1);
  std::size_t mismatches = 0;
  for (const auto& tok : tokens) {
    if (embedder.Embed(tok) != embedder.EmbedSparse(tok)) ++mismatches;
  }
  std::ostringstream detail;
  detail << tokens.size() << " tokens, s=" << widest << ", " << mismatches << " mismatches";
  return {"sparse_full_mask", mismatches == 0, detail.str()};
}

CheckResult CheckPartitionSums() {
  std::size_t failures = 0;
  std::size_t cases = 0;
  for (std::uint32_t n = 1; n <= 4; ++n) {
    const std::uint32_t triangle = n * (n + 1) / 2;
    for (std::uint32_t d = n; d <= 4096; ++d) {
      const auto dims = PartitionDims(d, n);
      std::uint64_t sum = 0;
      bool ok = dims.size() == n;
      for (std::size_t i = 0; i < dims.size(); ++i) {
        sum += dims[i];
        if (i > 0) {
          ok = ok && dims[i] >= dims[i - 1];
          if (d >= triangle) ok = ok && dims[i] > dims[i - 1];
        }
      }
      ok = ok && sum == d;
      failures += ok ? 0 : 1;
      ++cases;
    }
  }
  return {"partition_sums", failures == 0,
          std::to_string(cases) + " (d, N) cases, " + std::to_string(failures) + " failures"};
}

}  // namespace

std::vector<std::string> RandomUtf8Tokens(std::size_t count, std::size_t min_bytes,
                                          std::size_t max_bytes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> length(min_bytes, max_bytes);
  std::uniform_int_distribution<int> width(1, 3);
  std::vector<std::string> tokens;
  tokens.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t target = length(rng);
    std::string tok;
    while (tok.size() < target) {
      const std::size_t room = target - tok.size();
      const int w = std::min<int>(width(rng), static_cast<int>(room));
      char32_t cp = 0;
      if (w == 1) {
        cp = static_cast<char32_t>(std::uniform_int_distribution<std::uint32_t>(0x21, 0x7E)(rng));
      } else if (w == 2) {
        cp = static_cast<char32_t>(std::uniform_int_distribution<std::uint32_t>(0x80, 0x7FF)(rng));
      } else {
        cp = static_cast<char32_t>(std::uniform_int_distribution<std::uint32_t>(0x800, 0xFFFD)(rng));
        if (cp >= 0xD800 && cp <= 0xDFFF) cp -= 0x800;
      }
      AppendUtf8(tok, cp);
    }
    tokens.push_back(std::move(tok));
  }
  return tokens;
}

std::vector<CheckResult> RunSelfcheck(const SelfcheckOptions& options) {
  return {CheckBoundedness(options), CheckMultisetInvariance(options),
          CheckCacheTransparency(options), CheckSparseFullMask(options), CheckPartitionSums()};
}

}  // namespace hashembed
