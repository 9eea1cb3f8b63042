#include "txnlab/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "txnlab/clock.hpp"

namespace txnlab {

Metrics::Metrics(size_t worker_count, size_t max_seconds)
    : commits_per_sec_(std::max<size_t>(max_seconds, 1)),
      aborts_per_sec_(std::max<size_t>(max_seconds, 1)),
      response_ns_(std::max<size_t>(worker_count, 1)) {
  for (auto& v : response_ns_) v.reserve(1 << 14);
  for (auto& c : commits_per_sec_) c.store(0, std::memory_order_relaxed);
  for (auto& c : aborts_per_sec_) c.store(0, std::memory_order_relaxed);
}

size_t Metrics::bucket_of(uint64_t now_ns) const {
  const uint64_t start = start_ns_.load(std::memory_order_relaxed);
  const uint64_t delta = now_ns > start ? now_ns - start : 0;
  return std::min<size_t>(delta / kNsPerSec, commits_per_sec_.size() - 1);
}

void Metrics::record_commit(size_t worker, uint64_t response_ns, bool stolen, int32_t txn_type,
                            uint64_t now_ns) {
  commits_.fetch_add(1, std::memory_order_relaxed);
  if (stolen) stolen_.fetch_add(1, std::memory_order_relaxed);
  response_ns_total_.fetch_add(response_ns, std::memory_order_relaxed);
  response_ns_[worker % response_ns_.size()].push_back(response_ns);
  commits_by_type_[static_cast<size_t>(txn_type) % kMaxTxnTypes].fetch_add(
      1, std::memory_order_relaxed);
  commits_per_sec_[bucket_of(now_ns)].fetch_add(1, std::memory_order_relaxed);
}

void Metrics::record_abort(AttemptStatus kind, int32_t txn_type, uint64_t now_ns) {
  switch (kind) {
    case AttemptStatus::kAbortReadValidation:
      read_validation_.fetch_add(1, std::memory_order_relaxed);
      break;
    case AttemptStatus::kAbortWriteConflict:
      write_conflict_.fetch_add(1, std::memory_order_relaxed);
      break;
    case AttemptStatus::kAbortLockConflict:
      lock_conflict_.fetch_add(1, std::memory_order_relaxed);
      break;
    default:
      return;
  }
  aborts_by_type_[static_cast<size_t>(txn_type) % kMaxTxnTypes].fetch_add(
      1, std::memory_order_relaxed);
  aborts_per_sec_[bucket_of(now_ns)].fetch_add(1, std::memory_order_relaxed);
}

void Metrics::record_failed_no_retry(bool stolen) {
  failed_.fetch_add(1, std::memory_order_relaxed);
  if (stolen) stolen_.fetch_add(1, std::memory_order_relaxed);
}

uint64_t Metrics::aborts() const {
  return read_validation_.load(std::memory_order_relaxed) +
         write_conflict_.load(std::memory_order_relaxed) +
         lock_conflict_.load(std::memory_order_relaxed);
}

double Metrics::abort_rate_now() const {
  const uint64_t a = aborts();
  const uint64_t denom = a + commits();
  return denom == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(denom);
}

MetricsSnapshot Metrics::snapshot(double elapsed_secs) const {
  MetricsSnapshot s;
  s.commits = commits();
  s.read_validation_aborts = read_validation_.load(std::memory_order_relaxed);
  s.write_conflict_aborts = write_conflict_.load(std::memory_order_relaxed);
  s.lock_conflict_aborts = lock_conflict_.load(std::memory_order_relaxed);
  s.failed_no_retry = failed_.load(std::memory_order_relaxed);
  s.stolen = stolen_.load(std::memory_order_relaxed);

  s.tps = elapsed_secs > 0 ? static_cast<double>(s.commits) / elapsed_secs : 0.0;
  const uint64_t aborts = s.read_validation_aborts + s.write_conflict_aborts + s.lock_conflict_aborts;
  const uint64_t rate_denom = aborts + s.commits;
  s.abort_rate = rate_denom == 0 ? 0.0 : static_cast<double>(aborts) / static_cast<double>(rate_denom);

  for (size_t i = 0; i < kMaxTxnTypes; ++i) {
    s.commits_by_type[i] = commits_by_type_[i].load(std::memory_order_relaxed);
    s.aborts_by_type[i] = aborts_by_type_[i].load(std::memory_order_relaxed);
  }
  const size_t buckets = std::min<size_t>(
      commits_per_sec_.size(),
      static_cast<size_t>(std::ceil(std::max(elapsed_secs, 0.0))) + 1);
  s.commits_per_sec.resize(buckets);
  s.aborts_per_sec.resize(buckets);
  for (size_t i = 0; i < buckets; ++i) {
    s.commits_per_sec[i] = commits_per_sec_[i].load(std::memory_order_relaxed);
    s.aborts_per_sec[i] = aborts_per_sec_[i].load(std::memory_order_relaxed);
  }

  std::vector<uint64_t> all;
  size_t total = 0;
  for (const auto& v : response_ns_) total += v.size();
  all.reserve(total);
  for (const auto& v : response_ns_) all.insert(all.end(), v.begin(), v.end());
  if (!all.empty()) {
    std::sort(all.begin(), all.end());
    long double sum = 0;
    for (uint64_t x : all) sum += x;
    s.mean_rt_us = static_cast<double>(sum / all.size()) / 1000.0;
    const size_t n = all.size();
    const size_t rank = (99 * n + 99) / 100;  // nearest-rank percentile, 1-indexed
    s.p99_rt_us = static_cast<double>(all[rank - 1]) / 1000.0;
  }

  const uint64_t retired = s.commits + s.failed_no_retry;
  s.stolen_fraction = retired == 0 ? 0.0 : static_cast<double>(s.stolen) / static_cast<double>(retired);
  return s;
}

double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double sum = 0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

double rse_of(const std::vector<double>& xs) {
  const size_t n = xs.size();
  if (n < 2) return 0.0;
  const double m = mean_of(xs);
  if (m == 0.0) return 0.0;
  double ss = 0;
  for (double x : xs) ss += (x - m) * (x - m);
  const double stdev = std::sqrt(ss / static_cast<double>(n - 1));
  return stdev / (m * std::sqrt(static_cast<double>(n)));
}

}  // namespace txnlab
