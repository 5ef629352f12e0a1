#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace hashembed {

struct CacheStats {
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  double hit_rate = 0.0;
};

/// Thread-safe LRU memo of bounded projection rows keyed by (n-gram size,
/// window bytes). Rows are shared immutably, so a value handed out stays
/// valid after eviction.
class NGramCache {
 public:
  using Row = std::shared_ptr<const std::vector<double>>;

  /// Throws Error(kInvalidConfig) when capacity is zero.
  explicit NGramCache(std::size_t capacity);

  NGramCache(const NGramCache&) = delete;
  NGramCache& operator=(const NGramCache&) = delete;

  /// Returns the cached row or nullptr; counts a hit or a miss.
  Row Lookup(std::uint32_t ngram, std::string_view window);

  /// Inserts (or refreshes) a row, evicting the least recently used entry
  /// when full.
  void Insert(std::uint32_t ngram, std::string_view window, Row row);

  CacheStats stats() const;
  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const;

 private:
  static std::string MakeKey(std::uint32_t ngram, std::string_view window);

  struct Entry {
    std::string key;
    Row row;
  };

  std::size_t capacity_;
  mutable std::mutex mu_;
  std::list<Entry> lru_;  // front = most recent
  std::unordered_map<std::string, std::list<Entry>::iterator> index_;
  std::atomic<std::uint64_t> hits_{0};
  std::atomic<std::uint64_t> misses_{0};
};

}  // namespace hashembed
