#include "hashembed/vocab.hpp"

#include <fstream>
#include <unordered_set>

#include "hashembed/error.hpp"

namespace hashembed {

VocabFile MakeVocab(std::vector<std::string> tokens) {
  if (tokens.empty()) {
    throw Error(ErrorCode::kEmptyVocab, "vocabulary has no tokens");
  }
  VocabFile vocab;
  std::unordered_set<std::string_view> seen;
  seen.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].empty()) {
      throw Error(ErrorCode::kInvalidToken,
                  "empty vocabulary entry at line " + std::to_string(i + 1));
    }
  }
  vocab.tokens = std::move(tokens);
  for (std::size_t i = 0; i < vocab.tokens.size(); ++i) {
    if (!seen.insert(vocab.tokens[i]).second) vocab.duplicate_lines.push_back(i);
  }
  return vocab;
}

VocabFile ReadVocabFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIoError, "cannot open vocabulary " + path.string());
  }
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(std::move(line));
  }
  if (in.bad()) {
    throw Error(ErrorCode::kIoError, "read failed on " + path.string());
  }
  VocabFile vocab = MakeVocab(std::move(tokens));
  vocab.path = path;
  return vocab;
}

}  // namespace hashembed
