// hashembed: command-line front end.
//
// Exit codes: 0 success, 1 configuration error, 2 input error, 3 I/O error,
// 4 verification mismatch (including a corrupt or mismatched table).

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hashembed/bench.hpp"
#include "hashembed/embedder.hpp"
#include "hashembed/error.hpp"
#include "hashembed/selfcheck.hpp"
#include "hashembed/table_io.hpp"
#include "hashembed/vocab.hpp"
#include "json.hpp"

namespace {

using hashembed::Error;
using hashembed::ErrorCode;
using nlohmann::ordered_json;

enum ExitCode : int {
  kOk = 0,
  kConfigError = 1,
  kInputError = 2,
  kIoFailure = 3,
  kVerifyMismatch = 4,
};

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidConfig:
    case ErrorCode::kCacheDisabled:
      return kConfigError;
    case ErrorCode::kInvalidToken:
    case ErrorCode::kEmptyVocab:
    case ErrorCode::kMaskOverflow:
      return kInputError;
    case ErrorCode::kIoError:
      return kIoFailure;
    case ErrorCode::kFormatError:
    case ErrorCode::kVocabMismatch:
      return kVerifyMismatch;
  }
  return kConfigError;
}

struct ConfigFlags {
  hashembed::HashConfig config;

  void Attach(CLI::App* app) {
    app->add_option("--dim", config.dim, "Embedding size d")->capture_default_str();
    app->add_option("--max-ngram", config.max_ngram, "Maximum n-gram size N")
        ->capture_default_str();
    app->add_option("--bucket", config.bucket, "Bucket size B")->capture_default_str();
    app->add_option("--seed", config.random_state, "Random state for hash seeds")
        ->capture_default_str();
    app->add_option("--base", config.rolling_base, "Rolling-hash base")->capture_default_str();
    app->add_flag("--strip-prefix", config.strip_wordpiece_prefix,
                  "Drop a leading \"##\" before hashing");
    app->add_flag("--pad-zero", config.pad_token_zero, "Map the pad token to the zero vector");
    app->add_option("--pad-token", config.pad_token, "Pad token used with --pad-zero")
        ->capture_default_str();
  }
};

ordered_json ConfigJson(const hashembed::HashConfig& c) {
  return ordered_json{{"dim", c.dim},
                      {"max_ngram", c.max_ngram},
                      {"bucket", c.bucket},
                      {"random_state", c.random_state},
                      {"rolling_base", c.rolling_base}};
}

std::string ConfigEcho(const hashembed::HashConfig& c) {
  return "dim=" + std::to_string(c.dim) + " max_ngram=" + std::to_string(c.max_ngram) +
         " bucket=" + std::to_string(c.bucket) + " random_state=" +
         std::to_string(c.random_state) + " rolling_base=" + std::to_string(c.rolling_base);
}

struct EmbedArgs {
  ConfigFlags flags;
  std::vector<std::string> tokens;
  std::optional<std::size_t> cache_capacity;
  std::optional<std::uint32_t> sparse_ones;
  std::uint32_t sparse_k_max = 64;
  bool json = false;
};

int RunEmbed(EmbedArgs& args, bool tokens_given) {
  if (!tokens_given) {
    std::string line;
    while (std::getline(std::cin, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      args.tokens.push_back(line);
    }
  }
  if (args.tokens.empty()) {
    std::cerr << "embed: no tokens given\n";
    return kInputError;
  }
  hashembed::EmbedderOptions opts;
  opts.cache_capacity = args.cache_capacity;
  opts.sparse_ones = args.sparse_ones;
  opts.sparse_k_max = args.sparse_k_max;
  const hashembed::Embedder embedder(args.flags.config, opts);
  const auto matrix = embedder.EmbedBatch(
      args.tokens, hashembed::BatchOptions{.workers = 0, .sparse = args.sparse_ones.has_value()});

  if (args.json) {
    ordered_json out;
    out["config"] = ConfigJson(args.flags.config);
    out["embeddings"] = ordered_json::array();
    for (std::size_t t = 0; t < matrix.rows; ++t) {
      ordered_json values = ordered_json::array();
      for (double v : matrix.Row(t)) values.push_back(static_cast<float>(v));
      out["embeddings"].push_back({{"token", args.tokens[t]}, {"values", std::move(values)}});
    }
    std::cout << out.dump() << '\n';
    return kOk;
  }
  std::string line;
  for (std::size_t t = 0; t < matrix.rows; ++t) {
    line = args.tokens[t];
    for (double v : matrix.Row(t)) {
      line += '\t';
      line += hashembed::FormatFloat(static_cast<float>(v));
    }
    line += '\n';
    std::cout << line;
  }
  return kOk;
}

struct ExportArgs {
  ConfigFlags flags;
  std::string vocab;
  std::string out;
  std::string format = "binary";
  unsigned workers = 0;
  bool json = false;
};

int RunExport(const ExportArgs& args) {
  const auto vocab = hashembed::ReadVocabFile(args.vocab);
  if (!vocab.duplicate_lines.empty()) {
    std::cerr << "warning: " << vocab.duplicate_lines.size()
              << " duplicate token(s), first at line " << vocab.duplicate_lines.front() + 1
              << '\n';
  }
  const hashembed::ExportOptions opts{args.workers};
  const auto summary = args.format == "text"
                           ? hashembed::ExportText(vocab, args.flags.config, args.out, opts)
                           : hashembed::ExportTable(vocab, args.flags.config, args.out, opts);
  if (args.json) {
    ordered_json out{{"vocab_size", summary.vocab_size},
                     {"dim", summary.dim},
                     {"parameter_count", summary.parameter_count},
                     {"bytes_written", summary.bytes_written},
                     {"duplicate_tokens", summary.duplicate_tokens},
                     {"format", args.format},
                     {"config", ConfigJson(args.flags.config)}};
    std::cout << out.dump() << '\n';
  } else {
    std::cout << "vocab_size=" << summary.vocab_size << " dim=" << summary.dim
              << " parameter_count=" << summary.parameter_count
              << " bytes_written=" << summary.bytes_written << ' '
              << ConfigEcho(args.flags.config) << '\n';
  }
  return kOk;
}

struct VerifyArgs {
  ConfigFlags flags;  // only the token policy switches are used
  std::string table;
  std::string vocab;
  bool json = false;
};

int RunVerify(const VerifyArgs& args) {
  const auto vocab = hashembed::ReadVocabFile(args.vocab);
  const auto report = hashembed::VerifyTable(args.table, vocab,
                                             hashembed::TokenPolicy::FromConfig(args.flags.config));
  const auto config = hashembed::ConfigFromHeader(report.header);
  if (args.json) {
    ordered_json out{{"rows_checked", report.rows_checked},
                     {"mismatches", report.mismatches},
                     {"config", ConfigJson(config)}};
    std::cout << out.dump() << '\n';
  } else {
    std::cout << "rows_checked=" << report.rows_checked
              << " mismatches=" << report.mismatches.size() << ' ' << ConfigEcho(config) << '\n';
    const std::size_t shown = std::min<std::size_t>(report.mismatches.size(), 20);
    for (std::size_t i = 0; i < shown; ++i) {
      std::cout << "mismatch row " << report.mismatches[i] << " ("
                << vocab.tokens[report.mismatches[i]] << ")\n";
    }
  }
  return report.mismatches.empty() ? kOk : kVerifyMismatch;
}

struct BenchArgs {
  ConfigFlags flags;
  std::string corpus_path;
  std::string synthetic = "zipf";
  std::size_t tokens = 10'000;
  std::size_t vocab_size = 10'000;
  std::size_t sentence_length = 16;
  std::uint64_t corpus_seed = 0;
  std::vector<std::string> modes;
  std::size_t warmup = 1;
  std::size_t iters = 3;
  unsigned workers = 0;
  std::size_t cache_capacity = 4096;
  std::uint32_t sparse_ones = 16;
  std::uint32_t sparse_k_max = 64;
  std::string format = "table";
  bool json = false;
};

int RunBenchCmd(const BenchArgs& args) {
  hashembed::CorpusSpec spec;
  if (!args.corpus_path.empty()) {
    spec.source = hashembed::CorpusSource::kFile;
    spec.path = args.corpus_path;
  } else {
    spec.distribution = hashembed::ParseCorpusDistribution(args.synthetic);
    spec.token_count = args.tokens;
    spec.vocab_size = args.vocab_size;
    spec.sentence_length = args.sentence_length;
    spec.seed = args.corpus_seed;
  }
  const auto corpus = hashembed::LoadCorpus(spec);

  std::vector<std::string> modes = args.modes;
  if (modes.empty()) modes.push_back("dynamic");
  std::vector<hashembed::BenchReport> reports;
  for (const auto& name : modes) {
    hashembed::BenchOptions opts;
    opts.mode = hashembed::ParseBenchMode(name);
    opts.warmup_iters = args.warmup;
    opts.measure_iters = args.iters;
    opts.workers = args.workers;
    opts.cache_capacity = args.cache_capacity;
    opts.sparse_ones = args.sparse_ones;
    opts.sparse_k_max = args.sparse_k_max;
    reports.push_back(hashembed::RunBench(corpus, args.flags.config, opts));
  }
  const bool json = args.json || args.format == "json";
  if (!json) std::cout << "# " << ConfigEcho(args.flags.config) << " corpus=" << corpus.description
                       << '\n';
  std::cout << hashembed::EmitReports(
      reports, json ? hashembed::ReportFormat::kJson : hashembed::ReportFormat::kTable);
  if (json) std::cout << '\n';
  return kOk;
}

struct SelfcheckArgs {
  std::uint64_t seed = 0;
  std::size_t tokens = 10'000;
  std::string fault = "none";
};

int RunSelfcheckCmd(const SelfcheckArgs& args) {
  hashembed::SelfcheckOptions opts;
  opts.seed = args.seed;
  opts.bounded_tokens = args.tokens;
  opts.fault = args.fault == "bounding" ? hashembed::SelfcheckFault::kBounding
                                        : hashembed::SelfcheckFault::kNone;
  bool all = true;
  for (const auto& r : hashembed::RunSelfcheck(opts)) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
    all = all && r.passed;
  }
  return all ? kOk : kVerifyMismatch;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic n-gram pooling hash embeddings"};
  app.require_subcommand(1);

  EmbedArgs embed;
  auto* embed_cmd = app.add_subcommand("embed", "Embed tokens from arguments or stdin");
  embed.flags.Attach(embed_cmd);
  embed_cmd->add_option("tokens", embed.tokens, "Tokens (one per line on stdin if omitted)");
  embed_cmd->add_option("--cache-capacity", embed.cache_capacity, "Enable the n-gram cache");
  embed_cmd->add_option("--sparse-s", embed.sparse_ones, "Use the sparse path with s ones per row");
  embed_cmd->add_option("--sparse-kmax", embed.sparse_k_max, "Mask rows (max windows per token)")
      ->capture_default_str();
  embed_cmd->add_flag("--json", embed.json, "Emit JSON");

  ExportArgs exp;
  auto* export_cmd = app.add_subcommand("export", "Materialize a V x d table for a vocabulary");
  exp.flags.Attach(export_cmd);
  export_cmd->add_option("--vocab", exp.vocab, "Vocabulary file")->required();
  export_cmd->add_option("--out", exp.out, "Output path")->required();
  export_cmd->add_option("--format", exp.format, "binary or text")
      ->check(CLI::IsMember({"binary", "text"}))
      ->capture_default_str();
  export_cmd->add_option("--workers", exp.workers, "Worker threads (0 = all cores)");
  export_cmd->add_flag("--json", exp.json, "Emit JSON summary");

  VerifyArgs ver;
  auto* verify_cmd = app.add_subcommand("verify", "Recompute a binary table and compare bits");
  ver.flags.Attach(verify_cmd);
  verify_cmd->add_option("--table", ver.table, "Binary table")->required();
  verify_cmd->add_option("--vocab", ver.vocab, "Vocabulary file")->required();
  verify_cmd->add_flag("--json", ver.json, "Emit JSON report");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Embedding-stage latency benchmark");
  bench.flags.Attach(bench_cmd);
  auto* corpus_opt =
      bench_cmd->add_option("--corpus", bench.corpus_path, "Whitespace-separated corpus file");
  bench_cmd->add_option("--synthetic", bench.synthetic, "zipf or uniform")
      ->check(CLI::IsMember({"zipf", "uniform"}))
      ->excludes(corpus_opt)
      ->capture_default_str();
  bench_cmd->add_option("--tokens", bench.tokens, "Synthetic corpus size")->capture_default_str();
  bench_cmd->add_option("--vocab-size", bench.vocab_size, "Synthetic vocabulary size")
      ->capture_default_str();
  bench_cmd->add_option("--sentence-length", bench.sentence_length, "Tokens per sentence")
      ->capture_default_str();
  bench_cmd->add_option("--corpus-seed", bench.corpus_seed, "Synthetic corpus seed");
  bench_cmd->add_option("--mode", bench.modes,
                        "dynamic, dynamic+cache, dynamic+sparse, table_lookup (repeatable)");
  bench_cmd->add_option("--warmup", bench.warmup, "Untimed passes")->capture_default_str();
  bench_cmd->add_option("--iters", bench.iters, "Timed passes")->capture_default_str();
  bench_cmd->add_option("--workers", bench.workers, "Time parallel batches with N workers");
  bench_cmd->add_option("--cache-capacity", bench.cache_capacity, "Cache entries")
      ->capture_default_str();
  bench_cmd->add_option("--sparse-s", bench.sparse_ones, "Ones per sparse mask row")
      ->capture_default_str();
  bench_cmd->add_option("--sparse-kmax", bench.sparse_k_max, "Sparse mask rows")
      ->capture_default_str();
  bench_cmd->add_option("--format", bench.format, "table or json")
      ->check(CLI::IsMember({"table", "json"}))
      ->capture_default_str();
  bench_cmd->add_flag("--json", bench.json, "Same as --format json");

  SelfcheckArgs check;
  auto* check_cmd = app.add_subcommand("selfcheck", "Run the built-in invariant suite");
  check_cmd->add_option("--seed", check.seed, "Random state")->capture_default_str();
  check_cmd->add_option("--tokens", check.tokens, "Random tokens for the boundedness check")
      ->capture_default_str();
  check_cmd->add_option("--fault-inject", check.fault)
      ->check(CLI::IsMember({"none", "bounding"}))
      ->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (*embed_cmd) return RunEmbed(embed, embed_cmd->count("tokens") > 0);
    if (*export_cmd) return RunExport(exp);
    if (*verify_cmd) return RunVerify(ver);
    if (*bench_cmd) return RunBenchCmd(bench);
    if (*check_cmd) return RunSelfcheckCmd(check);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoFailure;
  }
  return kConfigError;
}
