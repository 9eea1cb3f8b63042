#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <vector>

#include "txnlab/clock.hpp"
#include "txnlab/concurrent_map.hpp"
#include "txnlab/statement.hpp"

namespace txnlab {

// Exponentially-weighted arrival-rate estimator (events/sec), half-life 1 s.
// Lazily decayed: each event first decays the stored rate by the elapsed
// time, then adds 1, so bursts push the value up and idle gaps halve it
// every half-life.
inline constexpr double kRateHalfLifeSecs = 1.0;

struct StateEntry {
  explicit StateEntry(size_t queue_count) : queue_counts(queue_count) {}

  std::vector<std::atomic<uint32_t>> queue_counts;
  std::atomic<double> rate{0.0};           // decayed as of last_touched
  std::atomic<uint64_t> total{0};          // cumulative enqueues carrying the ref
  std::atomic<uint32_t> argmax{0};         // queue with the max count, ties -> lowest
  std::atomic<uint64_t> last_touched_ns{0};

  double rate_at(uint64_t now_ns) const {
    const uint64_t last = last_touched_ns.load(std::memory_order_relaxed);
    const double dt = now_ns > last ? static_cast<double>(now_ns - last) / kNsPerSec : 0.0;
    return rate.load(std::memory_order_relaxed) * std::exp2(-dt / kRateHalfLifeSecs);
  }
};

struct EvictConfig {
  double rate_min = 0.5;     // keep entries still arriving faster than this
  uint64_t total_min = 5;    // keep entries seen at least this often
  // Crowding threshold for the entry's dominant queue; when unset, the 75th
  // percentile (nearest rank) of the current per-queue totals is used.
  std::optional<uint64_t> hot_override;
  double window_secs = 5.0;  // abort-rate stability window (gate, harness-side)
  size_t cap = 100000;       // hard entry-count bound (enforce_cap)
};

// Live per-reference queue occupancy. on_enqueue is called by the single
// dispatch thread; eviction runs on the housekeeping thread; readers may see
// slightly stale counts (by design).
class State {
 public:
  explicit State(size_t queue_count) : queue_count_(queue_count), totals_(queue_count) {
    for (auto& t : totals_) t.store(0, std::memory_order_relaxed);
  }

  size_t queue_count() const { return queue_count_; }

  void on_enqueue(const std::set<Reference>& refs, uint32_t queue, uint64_t now_ns);

  // Copy of the per-queue counts for one reference; zeros when absent.
  std::vector<uint32_t> queue_counts(const Reference& ref) const;

  std::shared_ptr<const StateEntry> find(const Reference& ref) const {
    return entries_.find(ref.token);
  }

  // Queue with the smallest cumulative reference total, ties -> lowest index.
  uint32_t least_loaded_queue() const;

  std::vector<uint64_t> total_per_queue() const {
    std::vector<uint64_t> out(queue_count_);
    for (size_t i = 0; i < queue_count_; ++i) out[i] = totals_[i].load(std::memory_order_relaxed);
    return out;
  }

  // Removes entries that are cold (rate < rate_min), rare (total < total_min)
  // and whose dominant queue is crowded (totals[argmax] > hot threshold).
  // Decrements per-queue totals by the evicted entries' counts.
  size_t evict_stale(uint64_t now_ns, const EvictConfig& cfg);

  // Drops coldest-rate entries until size() <= cap (memory backstop; may
  // remove hot entries under extreme pressure, unlike evict_stale).
  size_t enforce_cap(uint64_t now_ns, size_t cap);

  size_t size() const { return entries_.size(); }

  // CSV snapshot: reference,count_q0..count_qN,rate_r,total_t,argmax_q.
  void snapshot_csv(std::ostream& out) const;

 private:
  void subtract_entry_totals(const StateEntry& e);

  size_t queue_count_;
  ShardedMap<StateEntry> entries_{32};
  std::vector<std::atomic<uint64_t>> totals_;
};

}  // namespace txnlab
