#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace hashembed {

/// Random valid UTF-8 strings whose byte length is uniform in
/// [min_bytes, max_bytes]. Code points are drawn from the 1-, 2- and 3-byte
/// ranges (surrogates excluded).
std::vector<std::string> RandomUtf8Tokens(std::size_t count, std::size_t min_bytes,
                                          std::size_t max_bytes, std::uint64_t seed);

enum class SelfcheckFault {
  kNone,
  kBounding,  // test hook: embeddings are scaled past the bounded range
};

struct SelfcheckOptions {
  std::uint64_t seed = 0;
  std::size_t bounded_tokens = 10'000;
  SelfcheckFault fault = SelfcheckFault::kNone;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Runs boundedness, multiset invariance, cache transparency, sparse/dense
/// agreement at full mask, and partition sums. One result per check.
std::vector<CheckResult> RunSelfcheck(const SelfcheckOptions& options = {});

}  // namespace hashembed
