#include "hashembed/embedder.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>
#include <vector>

#include "hashembed/bench.hpp"
#include "hashembed/error.hpp"
#include "hashembed/selfcheck.hpp"

namespace {

using namespace hashembed;

HashConfig Dim(std::uint32_t d, std::uint64_t seed = 0) {
  HashConfig c;
  c.dim = d;
  c.random_state = seed;
  return c;
}

double Cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return dot / std::sqrt(na * nb);
}

// Composes the hashcore primitives step by step.
std::vector<double> ComposedEmbedding(const Embedder& e, std::string_view token) {
  const auto& cfg = e.config();
  std::vector<double> out;
  for (std::size_t p = 0; p < e.partition().size(); ++p) {
    const auto sig = NgramSignatures(token, static_cast<std::uint32_t>(p + 1), cfg.rolling_base,
                                     cfg.bucket);
    if (sig.values.empty()) {
      out.insert(out.end(), e.partition().dims[p], 0.0);
      continue;
    }
    const auto proj = ProjectAndBound(sig.values, e.partition().Slice(e.seeds(), p), cfg.bucket);
    const auto pooled = PoolMean(proj);
    out.insert(out.end(), pooled.begin(), pooled.end());
  }
  return out;
}

ErrorCode CodeOf(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kInvalidConfig;
}

TEST(Embedder, RejectsInvalidConfig) {
  EXPECT_EQ(CodeOf([] { Embedder e(Dim(2)); }), ErrorCode::kInvalidConfig);
  HashConfig c;
  c.bucket = 1;
  EXPECT_EQ(CodeOf([&] { Embedder e(c); }), ErrorCode::kInvalidConfig);
  c = HashConfig{};
  c.rolling_base = 1;
  EXPECT_EQ(CodeOf([&] { Embedder e(c); }), ErrorCode::kInvalidConfig);
  c = HashConfig{};
  c.max_ngram = 0;
  EXPECT_EQ(CodeOf([&] { Embedder e(c); }), ErrorCode::kInvalidConfig);
}

TEST(Embedder, ShapeAndRange) {
  const Embedder e(Dim(768));
  for (const char* tok : {"run", "[CLS]", "##ing", "a", "supercalifragilistic"}) {
    const auto v = e.Embed(tok);
    ASSERT_EQ(v.size(), 768u);
    for (double x : v) {
      EXPECT_GT(x, -1.0);
      EXPECT_LE(x, 1.0);
    }
  }
}

TEST(Embedder, GoldenVectorsFromReference) {
  // Produced by an independent scalar reference of the full pipeline.
  const Embedder e(Dim(6));
  EXPECT_EQ(e.Embed("run"),
            (std::vector<double>{0.20663408722022805, 0.3221832127447175, -0.4595924357828529,
                                 -0.9086612656393711, 0.9501097253492319, 0.7213155009507914}));
  EXPECT_EQ(e.Embed("ab"), (std::vector<double>{-0.16586372283895395, -0.29921538190549235,
                                                -0.017693723876143933, 0.0, 0.0, 0.0}));
  EXPECT_EQ(e.Embed("a"), (std::vector<double>{0.23498686035509198, 0, 0, 0, 0, 0}));
}

TEST(Embedder, MatchesComposedPrimitives) {
  const Embedder e(Dim(128, 11));
  for (const auto& tok : RandomUtf8Tokens(200, 1, 32, 77)) {
    ASSERT_EQ(e.Embed(tok), ComposedEmbedding(e, tok)) << tok;
  }
}

TEST(Embedder, SingleByteTokenZeroFillsHigherPartitions) {
  const Embedder e(Dim(768));
  const auto v = e.Embed("a");
  ASSERT_EQ(e.partition().dims, (std::vector<std::uint32_t>{128, 256, 384}));
  for (std::size_t i = 128; i < 768; ++i) EXPECT_EQ(v[i], 0.0) << i;
  EXPECT_TRUE(std::any_of(v.begin(), v.begin() + 128, [](double x) { return x != 0.0; }));
}

TEST(Embedder, MorphologyFixture) {
  const Embedder e(Dim(768));
  const auto running = e.Embed("running");
  const double related = Cosine(running, e.Embed("runner"));
  const double unrelated = Cosine(running, e.Embed("xqzwv"));
  EXPECT_GT(related, unrelated);
  EXPECT_NEAR(related, 0.5609219187516439, 1e-12);
  EXPECT_NEAR(unrelated, -0.016108848714899187, 1e-12);
}

TEST(Embedder, MultisetInvariance) {
  const Embedder e(Dim(768));
  const auto ab = e.Embed("ab");
  const auto ba = e.Embed("ba");
  EXPECT_TRUE(std::equal(ab.begin(), ab.begin() + 128, ba.begin()));
  EXPECT_FALSE(std::equal(ab.begin() + 128, ab.begin() + 384, ba.begin() + 128));
  // Same multiset of unigrams and bigrams, different trigram.
  const auto x = e.Embed("abab");
  const auto y = e.Embed("baba");
  EXPECT_FALSE(std::equal(x.begin(), x.begin() + 128, y.begin()));  // a,b counts differ
}

TEST(Embedder, EmptyTokenIsAnError) {
  const Embedder e(Dim(6));
  EXPECT_EQ(CodeOf([&] { e.Embed(""); }), ErrorCode::kInvalidToken);
}

TEST(Embedder, WordPiecePrefixStripping) {
  HashConfig c = Dim(12);
  const Embedder plain(c);
  c.strip_wordpiece_prefix = true;
  const Embedder stripping(c);
  EXPECT_EQ(stripping.Embed("##ing"), plain.Embed("ing"));
  EXPECT_NE(plain.Embed("##ing"), plain.Embed("ing"));
  EXPECT_EQ(CodeOf([&] { stripping.Embed("##"); }), ErrorCode::kInvalidToken);
}

TEST(Embedder, PadTokenZeroing) {
  HashConfig c = Dim(12);
  c.pad_token_zero = true;
  const Embedder e(c);
  EXPECT_EQ(e.Embed("[PAD]"), std::vector<double>(12, 0.0));
  const Embedder hashed(Dim(12));
  EXPECT_NE(hashed.Embed("[PAD]"), std::vector<double>(12, 0.0));
  // Other special tokens are hashed as plain bytes.
  EXPECT_EQ(e.Embed("[CLS]"), hashed.Embed("[CLS]"));
}

TEST(Embedder, DifferentSeedsDiffer) {
  EXPECT_NE(Embedder(Dim(64, 1)).Embed("token"), Embedder(Dim(64, 2)).Embed("token"));
}

TEST(EmbedBatch, EmptyInput) {
  const Embedder e(Dim(16));
  const auto m = e.EmbedBatch({});
  EXPECT_EQ(m.rows, 0u);
  EXPECT_EQ(m.cols, 16u);
  EXPECT_TRUE(m.values.empty());
}

TEST(EmbedBatch, RepeatedTokensGiveIdenticalRows) {
  const Embedder e(Dim(16));
  const std::vector<std::string> toks{"run", "run"};
  const auto m = e.EmbedBatch(toks);
  ASSERT_EQ(m.rows, 2u);
  EXPECT_TRUE(std::equal(m.Row(0).begin(), m.Row(0).end(), m.Row(1).begin()));
  const auto single = e.Embed("run");
  EXPECT_TRUE(std::equal(single.begin(), single.end(), m.Row(0).begin()));
}

TEST(EmbedBatch, ConcurrentEqualsSequential) {
  const Embedder e(Dim(256, 5));
  const auto toks = RandomUtf8Tokens(1000, 1, 24, 3);
  const auto serial = e.EmbedBatch(toks, {.workers = 1});
  for (unsigned w : {2U, 4U, 7U}) {
    EXPECT_EQ(e.EmbedBatch(toks, {.workers = w}).values, serial.values) << w << " workers";
  }
  for (std::size_t t = 0; t < toks.size(); t += 97) {
    const auto row = e.Embed(toks[t]);
    EXPECT_TRUE(std::equal(row.begin(), row.end(), serial.Row(t).begin()));
  }
}

TEST(EmbedBatch, EmptyTokenNamesIndex) {
  const Embedder e(Dim(16));
  const std::vector<std::string> toks{"a", "b", "", "c"};
  try {
    e.EmbedBatch(toks);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::kInvalidToken);
    EXPECT_NE(std::string(err.what()).find("index 2"), std::string::npos) << err.what();
  }
}

TEST(Cache, DisabledThrows) {
  const Embedder e(Dim(16));
  EXPECT_FALSE(e.has_cache());
  EXPECT_EQ(CodeOf([&] { e.cache_stats(); }), ErrorCode::kCacheDisabled);
}

TEST(Cache, ZeroCapacityRejected) {
  EXPECT_EQ(CodeOf([] { Embedder e(Dim(16), EmbedderOptions{.cache_capacity = 0}); }),
            ErrorCode::kInvalidConfig);
}

TEST(Cache, FreshStatsAreZero) {
  const Embedder e(Dim(16), EmbedderOptions{.cache_capacity = 8});
  const auto s = e.cache_stats();
  EXPECT_EQ(s.hits, 0u);
  EXPECT_EQ(s.misses, 0u);
  EXPECT_EQ(s.hit_rate, 0.0);
}

TEST(Cache, SecondLookupOfSameTokenAllHits) {
  const Embedder e(Dim(16), EmbedderOptions{.cache_capacity = 6});
  const auto first = e.Embed("run");
  auto s = e.cache_stats();
  EXPECT_EQ(s.hits, 0u);
  EXPECT_EQ(s.misses, 6u);  // r,u,n + ru,un + run
  const auto second = e.Embed("run");
  s = e.cache_stats();
  EXPECT_EQ(s.hits, 6u);
  EXPECT_EQ(s.misses, 6u);
  EXPECT_DOUBLE_EQ(s.hit_rate, 0.5);
  EXPECT_EQ(first, second);
}

TEST(Cache, LeastRecentlyUsedEviction) {
  NGramCache cache(2);
  auto row = std::make_shared<const std::vector<double>>(std::vector<double>{1.0});
  cache.Insert(1, "a", row);
  cache.Insert(1, "b", row);
  ASSERT_NE(cache.Lookup(1, "a"), nullptr);  // a is now most recent
  cache.Insert(1, "c", row);                 // evicts b
  EXPECT_EQ(cache.Lookup(1, "b"), nullptr);
  EXPECT_NE(cache.Lookup(1, "a"), nullptr);
  EXPECT_NE(cache.Lookup(1, "c"), nullptr);
  EXPECT_EQ(cache.Lookup(2, "a"), nullptr);  // n-gram size is part of the key
  EXPECT_EQ(cache.size(), 2u);
}

TEST(Cache, TransparencyProperty) {
  for (std::size_t capacity : {1, 7, 100, 5000}) {
    const Embedder plain(Dim(96, 4));
    const Embedder cached(Dim(96, 4), EmbedderOptions{.cache_capacity = capacity});
    const auto toks = RandomUtf8Tokens(400, 1, 12, capacity);
    for (const auto& t : toks) ASSERT_EQ(plain.Embed(t), cached.Embed(t)) << capacity;
  }
}

TEST(Cache, ConcurrentUseKeepsOutputsExact) {
  const Embedder plain(Dim(128));
  const Embedder cached(Dim(128), EmbedderOptions{.cache_capacity = 64});
  CorpusSpec spec;
  spec.token_count = 3000;
  const auto corpus = LoadCorpus(spec);
  const auto expected = plain.EmbedBatch(corpus.tokens, {.workers = 1});
  EXPECT_EQ(cached.EmbedBatch(corpus.tokens, {.workers = 6}).values, expected.values);
  const auto s = cached.cache_stats();
  EXPECT_GT(s.hits + s.misses, 0u);
}

TEST(Cache, ZipfBeatsUniformHitRate) {
  CorpusSpec zipf;
  zipf.token_count = 10000;
  CorpusSpec uniform = zipf;
  uniform.distribution = CorpusDistribution::kUniform;
  const EmbedderOptions opts{.cache_capacity = 2048};
  const Embedder a(Dim(64), opts);
  const Embedder b(Dim(64), opts);
  a.EmbedBatch(LoadCorpus(zipf).tokens, {.workers = 1});
  b.EmbedBatch(LoadCorpus(uniform).tokens, {.workers = 1});
  EXPECT_GT(a.cache_stats().hit_rate, b.cache_stats().hit_rate);
}

TEST(Sparse, FullMaskMatchesDense) {
  for (std::uint32_t d : {6U, 128U, 768U}) {
    const std::uint32_t widest = PartitionDims(d, 3).back();
    const Embedder e(Dim(d, 9), EmbedderOptions{.sparse_ones = widest});
    for (const auto& t : RandomUtf8Tokens(200, 1, 32, d)) {
      ASSERT_EQ(e.EmbedSparse(t), e.Embed(t)) << "d=" << d;
    }
  }
}

TEST(Sparse, ZeroOnesRejected) {
  EXPECT_EQ(CodeOf([] { Embedder e(Dim(16), EmbedderOptions{.sparse_ones = 0}); }),
            ErrorCode::kInvalidConfig);
}

TEST(Sparse, RequiresMask) {
  const Embedder e(Dim(16));
  EXPECT_EQ(CodeOf([&] { e.EmbedSparse("abc"); }), ErrorCode::kInvalidConfig);
}

TEST(Sparse, OverflowBeyondKMax) {
  const Embedder e(Dim(16), EmbedderOptions{.sparse_ones = 2, .sparse_k_max = 4});
  EXPECT_NO_THROW(e.EmbedSparse("abcd"));
  EXPECT_EQ(CodeOf([&] { e.EmbedSparse("abcde"); }), ErrorCode::kMaskOverflow);
  const std::vector<std::string> toks{"ab", "abcdefg"};
  EXPECT_EQ(CodeOf([&] { e.EmbedBatch(toks, {.workers = 1, .sparse = true}); }),
            ErrorCode::kMaskOverflow);
}

TEST(Sparse, MaskShapeAndDeterminism) {
  const auto part = MakeSeedPartition(128, 3);
  const SparseMask a(42, part, 8, 64);
  const SparseMask b(42, part, 8, 64);
  EXPECT_EQ(a.StoredIndices(), 3u * 64u * 8u);
  for (std::size_t p = 0; p < 3; ++p) {
    EXPECT_EQ(a.OnesIn(p), 8u);
    for (std::size_t slot = 0; slot < 64; ++slot) {
      const auto cols = a.Columns(p, slot);
      ASSERT_EQ(cols.size(), 8u);
      EXPECT_TRUE(std::is_sorted(cols.begin(), cols.end()));
      EXPECT_EQ(std::adjacent_find(cols.begin(), cols.end()), cols.end());
      EXPECT_LT(cols.back(), part.dims[p]);
      EXPECT_TRUE(std::equal(cols.begin(), cols.end(), b.Columns(p, slot).begin()));
    }
  }
  // Narrow partitions clamp the row width.
  const SparseMask wide(1, MakeSeedPartition(6, 3), 100, 4);
  EXPECT_EQ(wide.OnesIn(0), 1u);
  EXPECT_EQ(wide.OnesIn(2), 3u);
}

TEST(Sparse, SeedDerivedMaskChangesOutput) {
  const EmbedderOptions opts{.sparse_ones = 4};
  const auto a = Embedder(Dim(96, 1), opts).EmbedSparse("embedding");
  const auto b = Embedder(Dim(96, 2), opts).EmbedSparse("embedding");
  EXPECT_NE(a, b);
  // Partial mask: untouched columns of a short token stay zero.
  const auto single = Embedder(Dim(96, 1), opts).EmbedSparse("q");
  const auto nonzero = std::count_if(single.begin(), single.end(), [](double x) { return x != 0; });
  EXPECT_LE(nonzero, 4);
}

TEST(Sparse, BatchMatchesSingle) {
  const Embedder e(Dim(128), EmbedderOptions{.sparse_ones = 10});
  const auto toks = RandomUtf8Tokens(100, 1, 32, 8);
  const auto m = e.EmbedBatch(toks, {.workers = 3, .sparse = true});
  for (std::size_t t = 0; t < toks.size(); ++t) {
    const auto row = e.EmbedSparse(toks[t]);
    ASSERT_TRUE(std::equal(row.begin(), row.end(), m.Row(t).begin()));
  }
}

}  // namespace
