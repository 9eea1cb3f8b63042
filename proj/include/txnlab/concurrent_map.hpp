#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

namespace txnlab {

// Sharded hash map from reference token to a shared, pointer-stable entry.
// Contract: per-entry mutations are atomic (entries hold atomics); lookups
// may observe slightly stale cross-entry snapshots; erasure is safe against
// concurrent readers because entries are shared_ptr-owned.
template <typename T>
class ShardedMap {
 public:
  explicit ShardedMap(size_t shard_count = 16) : shards_(shard_count) {}

  std::shared_ptr<T> find(const std::string& key) const {
    const Shard& s = shard(key);
    std::shared_lock lk(s.mu);
    auto it = s.map.find(key);
    return it == s.map.end() ? nullptr : it->second;
  }

  template <typename Factory>
  std::shared_ptr<T> find_or_create(const std::string& key, Factory&& make) {
    Shard& s = shard(key);
    {
      std::shared_lock lk(s.mu);
      auto it = s.map.find(key);
      if (it != s.map.end()) return it->second;
    }
    std::unique_lock lk(s.mu);
    auto [it, inserted] = s.map.try_emplace(key, nullptr);
    if (inserted) {
      it->second = make();
      size_.fetch_add(1, std::memory_order_relaxed);
    }
    return it->second;
  }

  // find_or_create without handing out ownership: runs fn(entry) under the
  // shard lock. Cheaper on hot paths (no reference-count traffic) and safe
  // against concurrent erasure because erase_if/erase take the lock
  // exclusively.
  template <typename Factory, typename Fn>
  void apply(const std::string& key, Factory&& make, Fn&& fn) {
    Shard& s = shard(key);
    {
      std::shared_lock lk(s.mu);
      auto it = s.map.find(key);
      if (it != s.map.end()) {
        fn(*it->second);
        return;
      }
    }
    std::unique_lock lk(s.mu);
    auto [it, inserted] = s.map.try_emplace(key, nullptr);
    if (inserted) {
      it->second = make();
      size_.fetch_add(1, std::memory_order_relaxed);
    }
    fn(*it->second);
  }

  // Read-only visit of one entry under the shard lock; returns false when the
  // key is absent.
  template <typename Fn>
  bool peek(const std::string& key, Fn&& fn) const {
    const Shard& s = shard(key);
    std::shared_lock lk(s.mu);
    auto it = s.map.find(key);
    if (it == s.map.end()) return false;
    fn(*it->second);
    return true;
  }

  // Visits a snapshot of every entry. Entries inserted concurrently may or
  // may not be seen; visited pointers stay valid regardless of erasure.
  void for_each(const std::function<void(const std::string&, const std::shared_ptr<T>&)>& fn) const {
    for (const Shard& s : shards_) {
      std::vector<std::pair<std::string, std::shared_ptr<T>>> snap;
      {
        std::shared_lock lk(s.mu);
        snap.reserve(s.map.size());
        for (const auto& [k, v] : s.map) snap.emplace_back(k, v);
      }
      for (const auto& [k, v] : snap) fn(k, v);
    }
  }

  size_t erase_if(const std::function<bool(const std::string&, const T&)>& pred) {
    size_t erased = 0;
    for (Shard& s : shards_) {
      std::unique_lock lk(s.mu);
      for (auto it = s.map.begin(); it != s.map.end();) {
        if (pred(it->first, *it->second)) {
          it = s.map.erase(it);
          ++erased;
        } else {
          ++it;
        }
      }
    }
    size_.fetch_sub(erased, std::memory_order_relaxed);
    return erased;
  }

  bool erase(const std::string& key) {
    Shard& s = shard(key);
    std::unique_lock lk(s.mu);
    if (s.map.erase(key) > 0) {
      size_.fetch_sub(1, std::memory_order_relaxed);
      return true;
    }
    return false;
  }

  void clear() {
    size_t removed = 0;
    for (Shard& s : shards_) {
      std::unique_lock lk(s.mu);
      removed += s.map.size();
      s.map.clear();
    }
    size_.fetch_sub(removed, std::memory_order_relaxed);
  }

  size_t size() const { return size_.load(std::memory_order_relaxed); }

 private:
  struct Shard {
    mutable std::shared_mutex mu;
    std::unordered_map<std::string, std::shared_ptr<T>> map;
  };

  const Shard& shard(const std::string& key) const {
    return shards_[std::hash<std::string>{}(key) % shards_.size()];
  }
  Shard& shard(const std::string& key) {
    return shards_[std::hash<std::string>{}(key) % shards_.size()];
  }

  mutable std::vector<Shard> shards_;
  std::atomic<size_t> size_{0};
};

}  // namespace txnlab
