#include "hashembed/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

#include "hashembed/embedder.hpp"
#include "hashembed/error.hpp"
#include "json.hpp"

namespace hashembed {

namespace {

using Clock = std::chrono::steady_clock;
using ordered_json = nlohmann::ordered_json;

constexpr std::string_view kScope =
    "embedding stage only; tokenization excluded; no encoder in the loop";

inline void KeepAlive(const void* p) { __asm__ __volatile__("" : : "g"(p) : "memory"); }

double Nanos(Clock::duration d) {
  return static_cast<double>(std::chrono::duration_cast<std::chrono::nanoseconds>(d).count());
}

// Nearest-rank percentile over an unsorted sample; reorders `samples`.
double Percentile(std::vector<double>& samples, double q) {
  const std::size_t n = samples.size();
  std::size_t rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n) - 1;
  std::nth_element(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(rank),
                   samples.end());
  return samples[rank];
}

double Median(std::vector<double>& samples) {
  const std::size_t n = samples.size();
  auto mid = samples.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(samples.begin(), mid, samples.end());
  if (n % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(samples.begin(), mid);
  return (lower + upper) / 2.0;
}

std::vector<std::size_t> ChunkedSentences(std::size_t tokens, std::size_t length) {
  length = std::max<std::size_t>(length, 1);
  std::vector<std::size_t> ends;
  for (std::size_t end = length; end < tokens; end += length) ends.push_back(end);
  ends.push_back(tokens);
  return ends;
}

Corpus ReadCorpusFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIoError, "cannot open corpus " + path.string());
  }
  Corpus corpus;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream words(line);
    std::string word;
    const std::size_t before = corpus.tokens.size();
    while (words >> word) corpus.tokens.push_back(word);
    if (corpus.tokens.size() > before) corpus.sentence_ends.push_back(corpus.tokens.size());
  }
  if (in.bad()) {
    throw Error(ErrorCode::kIoError, "read failed on " + path.string());
  }
  if (corpus.tokens.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "corpus " + path.string() + " has no tokens");
  }
  corpus.description = "file:" + path.string();
  return corpus;
}

// Per-token and per-sentence statistics from one latency sample per token
// per iteration (samples laid out iteration-major).
void Summarize(std::vector<double> samples, const Corpus& corpus, std::size_t iters,
               BenchReport& report) {
  const std::size_t n = corpus.tokens.size();
  double sentence_total = 0.0;
  for (std::size_t it = 0; it < iters; ++it) {
    std::size_t begin = 0;
    for (std::size_t end : corpus.sentence_ends) {
      for (std::size_t t = begin; t < end; ++t) sentence_total += samples[it * n + t];
      begin = end;
    }
  }
  report.sentences = corpus.sentence_ends.size();
  report.per_sentence_mean_ns =
      sentence_total / static_cast<double>(iters * corpus.sentence_ends.size());
  report.per_token_mean_ns =
      std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
  report.per_token_median_ns = Median(samples);
  report.per_token_p99_ns = Percentile(samples, 0.99);
}

void TimeTableLookup(const Corpus& corpus, const HashConfig& config, const BenchOptions& options,
                     BenchReport& report) {
  // Build the table for the corpus vocabulary up front; only reads are timed.
  std::unordered_map<std::string_view, std::uint32_t> ids;
  std::vector<std::string> vocab;
  std::vector<std::uint32_t> corpus_ids;
  corpus_ids.reserve(corpus.tokens.size());
  for (const auto& tok : corpus.tokens) {
    auto [it, inserted] = ids.emplace(tok, static_cast<std::uint32_t>(vocab.size()));
    if (inserted) vocab.push_back(tok);
    corpus_ids.push_back(it->second);
  }
  const Embedder embedder(config);
  const EmbeddingMatrix m = embedder.EmbedBatch(vocab);
  std::vector<float> table(m.values.size());
  std::transform(m.values.begin(), m.values.end(), table.begin(),
                 [](double v) { return static_cast<float>(v); });

  const std::size_t dim = config.dim;
  std::vector<float> out(dim);
  auto read_row = [&](std::uint32_t id) {
    std::memcpy(out.data(), table.data() + std::size_t{id} * dim, dim * sizeof(float));
    KeepAlive(out.data());
  };
  for (std::size_t it = 0; it < options.warmup_iters; ++it) {
    for (auto id : corpus_ids) read_row(id);
  }
  std::vector<double> samples;
  samples.reserve(options.measure_iters * corpus_ids.size());
  for (std::size_t it = 0; it < options.measure_iters; ++it) {
    for (auto id : corpus_ids) {
      const auto t0 = Clock::now();
      read_row(id);
      const auto t1 = Clock::now();
      samples.push_back(Nanos(t1 - t0));
    }
  }
  Summarize(std::move(samples), corpus, options.measure_iters, report);
}

void TimeDynamic(const Corpus& corpus, const Embedder& embedder, const BenchOptions& options,
                 BenchReport& report) {
  const bool sparse = options.mode == BenchMode::kDynamicSparse;
  const std::size_t n = corpus.tokens.size();

  if (options.workers > 0) {
    const BatchOptions batch{options.workers, sparse};
    for (std::size_t it = 0; it < options.warmup_iters; ++it) {
      KeepAlive(embedder.EmbedBatch(corpus.tokens, batch).values.data());
    }
    // One whole-batch sample per iteration, spread evenly over its tokens.
    std::vector<double> samples;
    samples.reserve(options.measure_iters * n);
    for (std::size_t it = 0; it < options.measure_iters; ++it) {
      const auto t0 = Clock::now();
      const EmbeddingMatrix m = embedder.EmbedBatch(corpus.tokens, batch);
      const auto t1 = Clock::now();
      KeepAlive(m.values.data());
      samples.insert(samples.end(), n, Nanos(t1 - t0) / static_cast<double>(n));
    }
    Summarize(std::move(samples), corpus, options.measure_iters, report);
    return;
  }

  std::vector<double> out(embedder.dim());
  auto embed = [&](const std::string& tok) {
    if (sparse) {
      embedder.EmbedSparseInto(tok, out);
    } else {
      embedder.EmbedInto(tok, out);
    }
    KeepAlive(out.data());
  };
  for (std::size_t it = 0; it < options.warmup_iters; ++it) {
    for (const auto& tok : corpus.tokens) embed(tok);
  }
  std::vector<double> samples;
  samples.reserve(options.measure_iters * n);
  for (std::size_t it = 0; it < options.measure_iters; ++it) {
    for (const auto& tok : corpus.tokens) {
      const auto t0 = Clock::now();
      embed(tok);
      const auto t1 = Clock::now();
      samples.push_back(Nanos(t1 - t0));
    }
  }
  Summarize(std::move(samples), corpus, options.measure_iters, report);
}

std::string FixedNumber(double v, int precision) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << v;
  return os.str();
}

ordered_json ToJson(const BenchReport& r) {
  ordered_json j;
  j["mode"] = ToString(r.mode);
  j["tokens_measured"] = r.tokens_measured;
  j["per_token_mean_ns"] = r.per_token_mean_ns;
  j["per_token_median_ns"] = r.per_token_median_ns;
  j["per_token_p99_ns"] = r.per_token_p99_ns;
  j["per_sentence_mean_ns"] = r.per_sentence_mean_ns;
  j["sentences"] = r.sentences;
  if (r.hit_rate) j["hit_rate"] = *r.hit_rate;
  j["config"] = {{"dim", r.dim},
                 {"max_ngram", r.max_ngram},
                 {"bucket", r.bucket},
                 {"random_state", r.random_state},
                 {"rolling_base", r.rolling_base}};
  if (r.cache_capacity) j["cache_capacity"] = *r.cache_capacity;
  if (r.sparse_ones) j["sparse_ones"] = *r.sparse_ones;
  j["corpus"] = r.corpus;
  j["warmup_iters"] = r.warmup_iters;
  j["measure_iters"] = r.measure_iters;
  j["workers"] = r.workers;
  j["scope"] = r.scope;
  return j;
}

BenchReport FromJson(const ordered_json& j) {
  BenchReport r;
  r.mode = ParseBenchMode(j.at("mode").get<std::string>());
  r.tokens_measured = j.at("tokens_measured").get<std::uint64_t>();
  r.per_token_mean_ns = j.at("per_token_mean_ns").get<double>();
  r.per_token_median_ns = j.at("per_token_median_ns").get<double>();
  r.per_token_p99_ns = j.at("per_token_p99_ns").get<double>();
  r.per_sentence_mean_ns = j.at("per_sentence_mean_ns").get<double>();
  r.sentences = j.at("sentences").get<std::uint64_t>();
  if (j.contains("hit_rate")) r.hit_rate = j.at("hit_rate").get<double>();
  const auto& c = j.at("config");
  r.dim = c.at("dim").get<std::uint32_t>();
  r.max_ngram = c.at("max_ngram").get<std::uint32_t>();
  r.bucket = c.at("bucket").get<std::uint64_t>();
  r.random_state = c.at("random_state").get<std::uint64_t>();
  r.rolling_base = c.at("rolling_base").get<std::uint32_t>();
  if (j.contains("cache_capacity")) r.cache_capacity = j.at("cache_capacity").get<std::uint64_t>();
  if (j.contains("sparse_ones")) r.sparse_ones = j.at("sparse_ones").get<std::uint32_t>();
  r.corpus = j.at("corpus").get<std::string>();
  r.warmup_iters = j.at("warmup_iters").get<std::uint64_t>();
  r.measure_iters = j.at("measure_iters").get<std::uint64_t>();
  r.workers = j.at("workers").get<std::uint32_t>();
  r.scope = j.at("scope").get<std::string>();
  return r;
}

}  // namespace

std::string_view ToString(BenchMode mode) {
  switch (mode) {
    case BenchMode::kDynamic: return "dynamic";
    case BenchMode::kDynamicCache: return "dynamic+cache";
    case BenchMode::kDynamicSparse: return "dynamic+sparse";
    case BenchMode::kTableLookup: return "table_lookup";
  }
  return "unknown";
}

BenchMode ParseBenchMode(std::string_view name) {
  for (BenchMode m : {BenchMode::kDynamic, BenchMode::kDynamicCache, BenchMode::kDynamicSparse,
                      BenchMode::kTableLookup}) {
    if (ToString(m) == name) return m;
  }
  throw Error(ErrorCode::kInvalidConfig, "unknown bench mode '" + std::string(name) + "'");
}

std::string_view ToString(CorpusDistribution distribution) {
  return distribution == CorpusDistribution::kZipf ? "zipf" : "uniform";
}

CorpusDistribution ParseCorpusDistribution(std::string_view name) {
  if (name == "zipf") return CorpusDistribution::kZipf;
  if (name == "uniform") return CorpusDistribution::kUniform;
  throw Error(ErrorCode::kInvalidConfig, "unknown corpus distribution '" + std::string(name) + "'");
}

std::vector<std::string> SyntheticVocabulary(std::size_t size, double mean_length,
                                             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::poisson_distribution<int> extra(std::max(mean_length - 1.0, 0.0));
  std::uniform_int_distribution<int> letter('a', 'z');
  std::vector<std::string> vocab;
  vocab.reserve(size);
  for (std::size_t i = 0; i < size; ++i) {
    const int len = 1 + extra(rng);
    std::string word(static_cast<std::size_t>(len), 'a');
    for (char& ch : word) ch = static_cast<char>(letter(rng));
    vocab.push_back(std::move(word));
  }
  return vocab;
}

Corpus LoadCorpus(const CorpusSpec& spec) {
  if (spec.source == CorpusSource::kFile) return ReadCorpusFile(spec.path);
  if (spec.token_count == 0 || spec.vocab_size == 0) {
    throw Error(ErrorCode::kInvalidConfig, "synthetic corpus needs at least one token");
  }
  const auto vocab = SyntheticVocabulary(spec.vocab_size, spec.mean_token_length, spec.seed);
  // Draws use a stream distinct from the vocabulary's.
  std::mt19937_64 rng(spec.seed ^ 0xC0FFEEULL);
  Corpus corpus;
  corpus.tokens.reserve(spec.token_count);
  if (spec.distribution == CorpusDistribution::kZipf) {
    std::vector<double> weights(spec.vocab_size);
    for (std::size_t r = 0; r < weights.size(); ++r) {
      weights[r] = 1.0 / std::pow(static_cast<double>(r + 1), spec.zipf_exponent);
    }
    std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
    for (std::size_t t = 0; t < spec.token_count; ++t) corpus.tokens.push_back(vocab[pick(rng)]);
  } else {
    std::uniform_int_distribution<std::size_t> pick(0, spec.vocab_size - 1);
    for (std::size_t t = 0; t < spec.token_count; ++t) corpus.tokens.push_back(vocab[pick(rng)]);
  }
  corpus.sentence_ends = ChunkedSentences(corpus.tokens.size(), spec.sentence_length);
  std::ostringstream desc;
  desc << "synthetic:" << ToString(spec.distribution) << " tokens=" << spec.token_count
       << " vocab=" << spec.vocab_size << " mean_len=" << spec.mean_token_length;
  if (spec.distribution == CorpusDistribution::kZipf) desc << " exponent=" << spec.zipf_exponent;
  desc << " seed=" << spec.seed;
  corpus.description = desc.str();
  return corpus;
}

BenchReport RunBench(const Corpus& corpus, const HashConfig& config, const BenchOptions& options) {
  config.Validate();
  if (options.measure_iters == 0) {
    throw Error(ErrorCode::kInvalidConfig, "measure_iters must be >= 1");
  }
  if (corpus.tokens.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "corpus has no tokens");
  }

  BenchReport report;
  report.mode = options.mode;
  report.tokens_measured = corpus.tokens.size() * options.measure_iters;
  report.dim = config.dim;
  report.max_ngram = config.max_ngram;
  report.bucket = config.bucket;
  report.random_state = config.random_state;
  report.rolling_base = config.rolling_base;
  report.corpus = corpus.description;
  report.warmup_iters = options.warmup_iters;
  report.measure_iters = options.measure_iters;
  report.workers = options.workers;
  report.scope = std::string(kScope);

  if (options.mode == BenchMode::kTableLookup) {
    TimeTableLookup(corpus, config, options, report);
    return report;
  }

  EmbedderOptions eopts;
  if (options.mode == BenchMode::kDynamicCache) {
    eopts.cache_capacity = options.cache_capacity;
    report.cache_capacity = options.cache_capacity;
  }
  if (options.mode == BenchMode::kDynamicSparse) {
    eopts.sparse_ones = options.sparse_ones;
    eopts.sparse_k_max = options.sparse_k_max;
    report.sparse_ones = options.sparse_ones;
  }
  const Embedder embedder(config, eopts);
  TimeDynamic(corpus, embedder, options, report);
  if (embedder.has_cache()) report.hit_rate = embedder.cache_stats().hit_rate;
  return report;
}

BenchReport RunBench(const CorpusSpec& corpus, const HashConfig& config,
                     const BenchOptions& options) {
  return RunBench(LoadCorpus(corpus), config, options);
}

std::string EmitReport(const BenchReport& report, ReportFormat format) {
  return EmitReports(std::span<const BenchReport>(&report, 1), format);
}

std::string EmitReports(std::span<const BenchReport> reports, ReportFormat format) {
  if (format == ReportFormat::kJson) {
    if (reports.size() == 1) return ToJson(reports[0]).dump(2);
    ordered_json arr = ordered_json::array();
    for (const auto& r : reports) arr.push_back(ToJson(r));
    return arr.dump(2);
  }
  std::ostringstream os;
  os << std::left << std::setw(16) << "mode" << std::right << std::setw(6) << "dim"
     << std::setw(12) << "tokens" << std::setw(14) << "mean_ns" << std::setw(14) << "median_ns"
     << std::setw(14) << "p99_ns" << std::setw(16) << "sentence_ns" << std::setw(10)
     << "hit_rate" << '\n';
  for (const auto& r : reports) {
    os << std::left << std::setw(16) << ToString(r.mode) << std::right << std::setw(6) << r.dim
       << std::setw(12) << r.tokens_measured << std::setw(14)
       << FixedNumber(r.per_token_mean_ns, 1) << std::setw(14)
       << FixedNumber(r.per_token_median_ns, 1) << std::setw(14)
       << FixedNumber(r.per_token_p99_ns, 1) << std::setw(16)
       << FixedNumber(r.per_sentence_mean_ns, 1) << std::setw(10)
       << (r.hit_rate ? FixedNumber(*r.hit_rate, 4) : std::string("-")) << '\n';
  }
  return os.str();
}

BenchReport ParseReportJson(std::string_view json) {
  try {
    return FromJson(ordered_json::parse(json));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormatError, std::string("bad bench report: ") + e.what());
  }
}

}  // namespace hashembed
