#include "hashembed/ngram_cache.hpp"

#include "hashembed/error.hpp"

namespace hashembed {

NGramCache::NGramCache(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) {
    throw Error(ErrorCode::kInvalidConfig, "cache capacity must be >= 1");
  }
  index_.reserve(capacity);
}

std::string NGramCache::MakeKey(std::uint32_t ngram, std::string_view window) {
  std::string key;
  key.reserve(sizeof(ngram) + window.size());
  key.append(reinterpret_cast<const char*>(&ngram), sizeof(ngram));
  key.append(window);
  return key;
}

NGramCache::Row NGramCache::Lookup(std::uint32_t ngram, std::string_view window) {
  const std::string key = MakeKey(ngram, window);
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = index_.find(key);
    if (it != index_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second);
      hits_.fetch_add(1, std::memory_order_relaxed);
      return it->second->row;
    }
  }
  misses_.fetch_add(1, std::memory_order_relaxed);
  return nullptr;
}

void NGramCache::Insert(std::uint32_t ngram, std::string_view window, Row row) {
  std::string key = MakeKey(ngram, window);
  std::lock_guard<std::mutex> lock(mu_);
  auto it = index_.find(key);
  if (it != index_.end()) {
    // Another thread computed the same row; values are identical.
    lru_.splice(lru_.begin(), lru_, it->second);
    return;
  }
  if (lru_.size() >= capacity_) {
    index_.erase(lru_.back().key);
    lru_.pop_back();
  }
  lru_.push_front(Entry{key, std::move(row)});
  index_.emplace(std::move(key), lru_.begin());
}

CacheStats NGramCache::stats() const {
  CacheStats s;
  s.hits = hits_.load(std::memory_order_relaxed);
  s.misses = misses_.load(std::memory_order_relaxed);
  const std::uint64_t total = s.hits + s.misses;
  s.hit_rate = total == 0 ? 0.0 : static_cast<double>(s.hits) / static_cast<double>(total);
  return s;
}

std::size_t NGramCache::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return lru_.size();
}

}  // namespace hashembed
