#pragma once

// Materialized embedding tables.
//
// Binary layout (all fields little-endian, no padding, 40-byte header):
//
//   offset  size  field
//        0     4  magic "EELB"
//        4     4  format version (uint32, currently 1)
//        8     4  dim d (uint32)
//       12     4  vocabulary size V (uint32)
//       16     8  random_state (uint64)
//       24     4  max n-gram size N (uint32)
//       28     8  bucket size B (uint64)
//       36     4  rolling-hash base (uint32)
//       40   4Vd  V x d float32 payload, row-major, row = vocabulary index

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hashembed/hash_config.hpp"
#include "hashembed/vocab.hpp"

namespace hashembed {

inline constexpr std::array<char, 4> kTableMagic = {'E', 'E', 'L', 'B'};
inline constexpr std::uint32_t kTableFormatVersion = 1;
inline constexpr std::size_t kTableHeaderBytes = 40;

struct TableHeader {
  std::uint32_t version = kTableFormatVersion;
  std::uint32_t dim = 0;
  std::uint32_t vocab_size = 0;
  std::uint64_t random_state = 0;
  std::uint32_t max_ngram = 0;
  std::uint64_t bucket = 0;
  std::uint32_t rolling_base = 0;

  static TableHeader FromConfig(const HashConfig& config, std::uint32_t vocab_size);

  friend bool operator==(const TableHeader&, const TableHeader&) = default;
};

std::array<unsigned char, kTableHeaderBytes> EncodeHeader(const TableHeader& header);

/// Throws Error(kFormatError) on a short buffer, bad magic or unknown version.
TableHeader DecodeHeader(std::span<const unsigned char> bytes);

/// Token-handling switches that the binary header does not record.
struct TokenPolicy {
  bool strip_wordpiece_prefix = false;
  bool pad_token_zero = false;
  std::string pad_token = "[PAD]";

  static TokenPolicy FromConfig(const HashConfig& config);
};

/// Config equivalent to the one that produced a table with this header.
HashConfig ConfigFromHeader(const TableHeader& header, const TokenPolicy& policy = {});

struct ExportSummary {
  std::uint64_t vocab_size = 0;
  std::uint32_t dim = 0;
  std::uint64_t parameter_count = 0;  // V * d
  std::uint64_t bytes_written = 0;
  std::uint64_t duplicate_tokens = 0;
};

struct ExportOptions {
  unsigned workers = 0;  // 0 = hardware concurrency
};

/// Writes the binary table. Throws Error(kIoError) when the destination
/// cannot be written.
ExportSummary ExportTable(const VocabFile& vocab, const HashConfig& config,
                          const std::filesystem::path& out_path, ExportOptions options = {});

/// Writes "token<TAB>v_1<TAB>...<TAB>v_d" per line, values are the float32
/// table entries printed with 9 significant digits.
ExportSummary ExportText(const VocabFile& vocab, const HashConfig& config,
                         const std::filesystem::path& out_path, ExportOptions options = {});

struct LoadedTable {
  TableHeader header;
  std::vector<float> values;  // vocab_size x dim
};

/// Throws Error(kIoError) when unreadable, Error(kFormatError) when the
/// header is corrupt or the payload length disagrees with it.
LoadedTable ReadTable(const std::filesystem::path& path);

struct VerifyReport {
  std::uint64_t rows_checked = 0;
  std::vector<std::uint64_t> mismatches;
  TableHeader header;
};

/// Recomputes every row from the header's config and compares bit-exactly.
/// Throws Error(kVocabMismatch) when the row count differs from the vocab.
VerifyReport VerifyTable(const std::filesystem::path& table_path, const VocabFile& vocab,
                         const TokenPolicy& policy = {});

/// Shortest text form with 9 significant digits (round-trips float32).
std::string FormatFloat(float value);

}  // namespace hashembed
