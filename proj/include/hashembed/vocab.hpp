#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace hashembed {

/// WordPiece-style vocabulary: one token per line, index = line number.
struct VocabFile {
  std::filesystem::path path;
  std::vector<std::string> tokens;
  /// Zero-based line indices whose token already appeared earlier.
  std::vector<std::size_t> duplicate_lines;

  std::size_t size() const noexcept { return tokens.size(); }
};

/// Reads a UTF-8 vocabulary file. A trailing '\r' on each line is dropped.
/// Throws Error(kIoError) when unreadable, Error(kInvalidToken) on an empty
/// line, Error(kEmptyVocab) when the file has no tokens.
VocabFile ReadVocabFile(const std::filesystem::path& path);

/// Builds an in-memory vocabulary with the same validation as ReadVocabFile.
VocabFile MakeVocab(std::vector<std::string> tokens);

}  // namespace hashembed
