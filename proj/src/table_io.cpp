#include "hashembed/table_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <limits>

#include "hashembed/embedder.hpp"
#include "hashembed/error.hpp"

namespace hashembed {

namespace {

constexpr std::size_t kRowsPerChunk = 2048;

template <typename T>
void PutLE(unsigned char* dst, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    dst[i] = static_cast<unsigned char>(value >> (8 * i));
  }
}

template <typename T>
T GetLE(const unsigned char* src) {
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<T>(src[i]) << (8 * i);
  }
  return value;
}

std::uint32_t CheckedVocabSize(const VocabFile& vocab) {
  if (vocab.tokens.empty()) {
    throw Error(ErrorCode::kEmptyVocab, "vocabulary has no tokens");
  }
  if (vocab.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorCode::kInvalidConfig, "vocabulary too large for the table format");
  }
  return static_cast<std::uint32_t>(vocab.size());
}

std::ofstream OpenForWrite(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::kIoError, "cannot open " + path.string() + " for writing");
  }
  return out;
}

void FinishWrite(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) {
    throw Error(ErrorCode::kIoError, "write failed on " + path.string());
  }
}

// Feeds float32 rows to `sink` chunk by chunk, in vocabulary order.
template <typename Sink>
void ForEachChunk(const VocabFile& vocab, const HashConfig& config, ExportOptions options,
                  Sink&& sink) {
  const Embedder embedder(config);
  std::vector<float> rows;
  for (std::size_t begin = 0; begin < vocab.size(); begin += kRowsPerChunk) {
    const std::size_t end = std::min(vocab.size(), begin + kRowsPerChunk);
    const auto span = std::span<const std::string>(vocab.tokens).subspan(begin, end - begin);
    const EmbeddingMatrix m = embedder.EmbedBatch(span, BatchOptions{options.workers, false});
    rows.resize(m.values.size());
    std::transform(m.values.begin(), m.values.end(), rows.begin(),
                   [](double v) { return static_cast<float>(v); });
    sink(begin, std::span<const float>(rows));
  }
}

}  // namespace

TableHeader TableHeader::FromConfig(const HashConfig& config, std::uint32_t vocab_size) {
  TableHeader h;
  h.dim = config.dim;
  h.vocab_size = vocab_size;
  h.random_state = config.random_state;
  h.max_ngram = config.max_ngram;
  h.bucket = config.bucket;
  h.rolling_base = config.rolling_base;
  return h;
}

std::array<unsigned char, kTableHeaderBytes> EncodeHeader(const TableHeader& header) {
  std::array<unsigned char, kTableHeaderBytes> bytes{};
  std::memcpy(bytes.data(), kTableMagic.data(), kTableMagic.size());
  PutLE(bytes.data() + 4, header.version);
  PutLE(bytes.data() + 8, header.dim);
  PutLE(bytes.data() + 12, header.vocab_size);
  PutLE(bytes.data() + 16, header.random_state);
  PutLE(bytes.data() + 24, header.max_ngram);
  PutLE(bytes.data() + 28, header.bucket);
  PutLE(bytes.data() + 36, header.rolling_base);
  return bytes;
}

TableHeader DecodeHeader(std::span<const unsigned char> bytes) {
  if (bytes.size() < kTableHeaderBytes) {
    throw Error(ErrorCode::kFormatError, "table header truncated");
  }
  if (std::memcmp(bytes.data(), kTableMagic.data(), kTableMagic.size()) != 0) {
    throw Error(ErrorCode::kFormatError, "bad magic, not an embedding table");
  }
  TableHeader h;
  h.version = GetLE<std::uint32_t>(bytes.data() + 4);
  if (h.version != kTableFormatVersion) {
    throw Error(ErrorCode::kFormatError,
                "unsupported table format version " + std::to_string(h.version));
  }
  h.dim = GetLE<std::uint32_t>(bytes.data() + 8);
  h.vocab_size = GetLE<std::uint32_t>(bytes.data() + 12);
  h.random_state = GetLE<std::uint64_t>(bytes.data() + 16);
  h.max_ngram = GetLE<std::uint32_t>(bytes.data() + 24);
  h.bucket = GetLE<std::uint64_t>(bytes.data() + 28);
  h.rolling_base = GetLE<std::uint32_t>(bytes.data() + 36);
  return h;
}

TokenPolicy TokenPolicy::FromConfig(const HashConfig& config) {
  return TokenPolicy{config.strip_wordpiece_prefix, config.pad_token_zero, config.pad_token};
}

HashConfig ConfigFromHeader(const TableHeader& header, const TokenPolicy& policy) {
  HashConfig config;
  config.dim = header.dim;
  config.max_ngram = header.max_ngram;
  config.bucket = header.bucket;
  config.random_state = header.random_state;
  config.rolling_base = header.rolling_base;
  config.strip_wordpiece_prefix = policy.strip_wordpiece_prefix;
  config.pad_token_zero = policy.pad_token_zero;
  config.pad_token = policy.pad_token;
  return config;
}

ExportSummary ExportTable(const VocabFile& vocab, const HashConfig& config,
                          const std::filesystem::path& out_path, ExportOptions options) {
  config.Validate();
  const std::uint32_t vocab_size = CheckedVocabSize(vocab);
  std::ofstream out = OpenForWrite(out_path);

  const auto header = EncodeHeader(TableHeader::FromConfig(config, vocab_size));
  out.write(reinterpret_cast<const char*>(header.data()), header.size());

  std::vector<unsigned char> buffer;
  ForEachChunk(vocab, config, options, [&](std::size_t, std::span<const float> rows) {
    buffer.resize(rows.size() * sizeof(float));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      PutLE(buffer.data() + i * sizeof(float), std::bit_cast<std::uint32_t>(rows[i]));
    }
    out.write(reinterpret_cast<const char*>(buffer.data()),
              static_cast<std::streamsize>(buffer.size()));
  });
  FinishWrite(out, out_path);

  ExportSummary summary;
  summary.vocab_size = vocab_size;
  summary.dim = config.dim;
  summary.parameter_count = std::uint64_t{vocab_size} * config.dim;
  summary.bytes_written = kTableHeaderBytes + summary.parameter_count * sizeof(float);
  summary.duplicate_tokens = vocab.duplicate_lines.size();
  return summary;
}

std::string FormatFloat(float value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 9);
  return std::string(buf, res.ptr);
}

ExportSummary ExportText(const VocabFile& vocab, const HashConfig& config,
                         const std::filesystem::path& out_path, ExportOptions options) {
  config.Validate();
  const std::uint32_t vocab_size = CheckedVocabSize(vocab);
  std::ofstream out = OpenForWrite(out_path);

  std::uint64_t bytes = 0;
  std::string line;
  ForEachChunk(vocab, config, options, [&](std::size_t first, std::span<const float> rows) {
    const std::size_t count = rows.size() / config.dim;
    for (std::size_t r = 0; r < count; ++r) {
      line = vocab.tokens[first + r];
      for (float v : rows.subspan(r * config.dim, config.dim)) {
        line += '\t';
        line += FormatFloat(v);
      }
      line += '\n';
      out.write(line.data(), static_cast<std::streamsize>(line.size()));
      bytes += line.size();
    }
  });
  FinishWrite(out, out_path);

  ExportSummary summary;
  summary.vocab_size = vocab_size;
  summary.dim = config.dim;
  summary.parameter_count = std::uint64_t{vocab_size} * config.dim;
  summary.bytes_written = bytes;
  summary.duplicate_tokens = vocab.duplicate_lines.size();
  return summary;
}

LoadedTable ReadTable(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIoError, "cannot open table " + path.string());
  }
  std::array<unsigned char, kTableHeaderBytes> raw{};
  in.read(reinterpret_cast<char*>(raw.data()), raw.size());
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
    throw Error(ErrorCode::kFormatError, "table header truncated");
  }
  LoadedTable table;
  table.header = DecodeHeader(raw);

  std::error_code ec;
  const auto file_size = std::filesystem::file_size(path, ec);
  if (ec) {
    throw Error(ErrorCode::kIoError, "cannot stat " + path.string());
  }
  // Division keeps corrupt header sizes from overflowing.
  const std::uint64_t payload_bytes = file_size - kTableHeaderBytes;
  const std::uint64_t dim = table.header.dim;
  if (dim == 0 || payload_bytes % (dim * sizeof(float)) != 0 ||
      payload_bytes / (dim * sizeof(float)) != table.header.vocab_size) {
    throw Error(ErrorCode::kFormatError,
                "payload is " + std::to_string(payload_bytes) + " bytes, header declares " +
                    std::to_string(table.header.vocab_size) + " x " + std::to_string(dim) +
                    " floats");
  }
  const std::uint64_t count = payload_bytes / sizeof(float);
  std::vector<unsigned char> payload(count * sizeof(float));
  in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
  if (in.gcount() != static_cast<std::streamsize>(payload.size())) {
    throw Error(ErrorCode::kIoError, "short read on " + path.string());
  }
  table.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    table.values[i] =
        std::bit_cast<float>(GetLE<std::uint32_t>(payload.data() + i * sizeof(float)));
  }
  return table;
}

VerifyReport VerifyTable(const std::filesystem::path& table_path, const VocabFile& vocab,
                         const TokenPolicy& policy) {
  const LoadedTable table = ReadTable(table_path);
  if (table.header.vocab_size != vocab.size()) {
    throw Error(ErrorCode::kVocabMismatch,
                "table has " + std::to_string(table.header.vocab_size) +
                    " rows, vocabulary has " + std::to_string(vocab.size()));
  }
  HashConfig config = ConfigFromHeader(table.header, policy);
  try {
    config.Validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kFormatError, "header config invalid: " + e.message());
  }

  VerifyReport report;
  report.header = table.header;
  const std::size_t dim = config.dim;
  ForEachChunk(vocab, config, ExportOptions{}, [&](std::size_t first, std::span<const float> rows) {
    const std::size_t count = rows.size() / dim;
    for (std::size_t r = 0; r < count; ++r) {
      const std::size_t row = first + r;
      const float* stored = table.values.data() + row * dim;
      const float* fresh = rows.data() + r * dim;
      if (std::memcmp(stored, fresh, dim * sizeof(float)) != 0) {
        report.mismatches.push_back(row);
      }
      ++report.rows_checked;
    }
  });
  return report;
}

}  // namespace hashembed
