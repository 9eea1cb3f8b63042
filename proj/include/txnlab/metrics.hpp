#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <vector>

#include "txnlab/protocol.hpp"

namespace txnlab {

// Upper bound on distinct transaction type ids per benchmark (TATP uses 7).
inline constexpr size_t kMaxTxnTypes = 8;

// Derived per-run numbers, computed once the run has quiesced.
struct MetricsSnapshot {
  uint64_t commits = 0;
  uint64_t read_validation_aborts = 0;
  uint64_t write_conflict_aborts = 0;
  uint64_t lock_conflict_aborts = 0;
  uint64_t failed_no_retry = 0;
  uint64_t stolen = 0;

  double tps = 0.0;
  double abort_rate = 0.0;  // retryable aborts / (retryable aborts + commits)
  double mean_rt_us = 0.0;
  double p99_rt_us = 0.0;
  double stolen_fraction = 0.0;

  std::array<uint64_t, kMaxTxnTypes> commits_by_type{};
  std::array<uint64_t, kMaxTxnTypes> aborts_by_type{};
  std::vector<uint64_t> commits_per_sec;  // trimmed to ceil(elapsed) buckets
  std::vector<uint64_t> aborts_per_sec;

  uint64_t write_aborts() const { return write_conflict_aborts + lock_conflict_aborts; }
  uint64_t read_aborts() const { return read_validation_aborts; }
};

// Run counters. Counter updates are lock-free; response times go to
// per-worker vectors (one writer each) merged when a snapshot is taken.
class Metrics {
 public:
  explicit Metrics(size_t worker_count, size_t max_seconds = 600);

  // Marks the run start; per-second buckets are offsets from this instant.
  void set_start_ns(uint64_t t) { start_ns_.store(t, std::memory_order_relaxed); }

  // worker is the executing worker's index; response_ns spans from transaction
  // creation (pre-scheduling) to commit, across every retry.
  void record_commit(size_t worker, uint64_t response_ns, bool stolen, int32_t txn_type,
                     uint64_t now_ns);
  void record_abort(AttemptStatus kind, int32_t txn_type, uint64_t now_ns);
  void record_failed_no_retry(bool stolen);

  uint64_t commits() const { return commits_.load(std::memory_order_relaxed); }
  // Sum of all recorded response times; paired with commits() it gives the
  // throttle controller a rolling mean via deltas between polls.
  uint64_t response_ns_total() const {
    return response_ns_total_.load(std::memory_order_relaxed);
  }
  uint64_t aborts() const;
  uint64_t failed_no_retry() const { return failed_.load(std::memory_order_relaxed); }
  // Transactions fully retired (committed or permanently failed); the
  // generator uses this to bound outstanding work.
  uint64_t retired() const { return commits() + failed_no_retry(); }

  // Live abort rate over all activity so far (0 when nothing finished).
  double abort_rate_now() const;

  // Merge and summarize; call only when workers are quiesced.
  MetricsSnapshot snapshot(double elapsed_secs) const;

 private:
  size_t bucket_of(uint64_t now_ns) const;

  std::atomic<uint64_t> commits_{0};
  std::atomic<uint64_t> read_validation_{0};
  std::atomic<uint64_t> write_conflict_{0};
  std::atomic<uint64_t> lock_conflict_{0};
  std::atomic<uint64_t> failed_{0};
  std::atomic<uint64_t> stolen_{0};
  std::atomic<uint64_t> response_ns_total_{0};
  std::atomic<uint64_t> start_ns_{0};
  std::array<std::atomic<uint64_t>, kMaxTxnTypes> commits_by_type_{};
  std::array<std::atomic<uint64_t>, kMaxTxnTypes> aborts_by_type_{};
  std::vector<std::atomic<uint64_t>> commits_per_sec_;
  std::vector<std::atomic<uint64_t>> aborts_per_sec_;
  std::vector<std::vector<uint64_t>> response_ns_;  // one per worker
};

// Mean and relative standard error across repetition values. RSE uses the
// sample standard deviation (n-1) divided by mean * sqrt(n); it is 0 when the
// mean is 0 or there are fewer than two repetitions.
double mean_of(const std::vector<double>& xs);
double rse_of(const std::vector<double>& xs);

}  // namespace txnlab
