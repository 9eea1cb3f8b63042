#pragma once

#include <atomic>
#include <cstdint>
#include <ostream>
#include <set>

#include "txnlab/concurrent_map.hpp"
#include "txnlab/statement.hpp"

namespace txnlab {

// Per-reference abort/commit counters learned from attempt outcomes.
// Thread-safe: entries are updated with atomic increments from any worker;
// readers tolerate slightly stale values. A reference never recorded is
// equivalent to (0, 0). Writes are dropped while the table is frozen.
class History {
 public:
  History() = default;

  void record_abort(const std::set<Reference>& refs) { record(refs, true); }
  void record_commit(const std::set<Reference>& refs) { record(refs, false); }

  uint64_t abort_count(const Reference& ref) const {
    uint64_t aborts = 0;
    entries_.peek(ref.token,
                  [&](const Entry& e) { aborts = e.aborts.load(std::memory_order_relaxed); });
    return aborts;
  }
  uint64_t commit_count(const Reference& ref) const {
    uint64_t commits = 0;
    entries_.peek(ref.token,
                  [&](const Entry& e) { commits = e.commits.load(std::memory_order_relaxed); });
    return commits;
  }

  // abort / (abort + commit); 0 when the denominator is 0.
  double fraction(const Reference& ref) const {
    double a = 0.0;
    double c = 0.0;
    if (!entries_.peek(ref.token, [&](const Entry& e) {
          a = static_cast<double>(e.aborts.load(std::memory_order_relaxed));
          c = static_cast<double>(e.commits.load(std::memory_order_relaxed));
        })) {
      return 0.0;
    }
    return (a + c) == 0.0 ? 0.0 : a / (a + c);
  }

  void set_writable(bool on) { writable_.store(on, std::memory_order_release); }
  bool writable() const { return writable_.load(std::memory_order_acquire); }

  // Drops all entries and bumps the generation counter (continuous mode).
  void regenerate() {
    entries_.clear();
    generation_.fetch_add(1, std::memory_order_relaxed);
  }
  uint64_t generation() const { return generation_.load(std::memory_order_relaxed); }

  size_t size() const { return entries_.size(); }

  // CSV snapshot: reference,abort_count,commit_count - sorted by reference.
  void snapshot_csv(std::ostream& out) const;

 private:
  struct Entry {
    std::atomic<uint64_t> aborts{0};
    std::atomic<uint64_t> commits{0};
  };

  void record(const std::set<Reference>& refs, bool aborted) {
    if (!writable()) return;
    for (const Reference& r : refs) {
      entries_.apply(
          r.token, [] { return std::make_shared<Entry>(); },
          [&](Entry& e) { (aborted ? e.aborts : e.commits).fetch_add(1, std::memory_order_relaxed); });
    }
  }

  ShardedMap<Entry> entries_{32};
  std::atomic<bool> writable_{true};
  std::atomic<uint64_t> generation_{0};
};

}  // namespace txnlab
