#include <cmath>
#include <vector>

#include "doctest.h"
#include "txnlab/clock.hpp"
#include "txnlab/metrics.hpp"

using namespace txnlab;

namespace {

void commit_n(Metrics& m, int n, uint64_t response_ns, uint64_t now_ns, int32_t type = 0,
              bool stolen = false) {
  for (int i = 0; i < n; ++i) m.record_commit(0, response_ns, stolen, type, now_ns);
}

}  // namespace

TEST_CASE("p99 uses the nearest-rank convention over the merged samples") {
  Metrics m(2);
  m.set_start_ns(0);
  // 100 samples of 1..100 ms spread over two workers: rank ceil(0.99*100)=99.
  for (uint64_t i = 1; i <= 100; ++i) {
    m.record_commit(i % 2, i * 1'000'000, false, 0, 0);
  }
  const MetricsSnapshot s = m.snapshot(1.0);
  CHECK(s.p99_rt_us == doctest::Approx(99'000.0));
  CHECK(s.mean_rt_us == doctest::Approx(50'500.0));

  // A single sample is both the mean and every percentile.
  Metrics one(1);
  one.record_commit(0, 7'000, false, 0, 0);
  const MetricsSnapshot s1 = one.snapshot(1.0);
  CHECK(s1.p99_rt_us == doctest::Approx(7.0));
  CHECK(s1.mean_rt_us == doctest::Approx(7.0));
}

TEST_CASE("abort rate counts retryable aborts only and ignores permanent failures") {
  Metrics m(1);
  m.set_start_ns(0);
  commit_n(m, 6, 1000, 0);
  m.record_abort(AttemptStatus::kAbortReadValidation, 0, 0);
  m.record_abort(AttemptStatus::kAbortWriteConflict, 0, 0);
  m.record_abort(AttemptStatus::kAbortLockConflict, 0, 0);
  m.record_abort(AttemptStatus::kAbortWriteConflict, 0, 0);
  m.record_failed_no_retry(false);
  m.record_failed_no_retry(false);

  CHECK(m.aborts() == 4);
  CHECK(m.failed_no_retry() == 2);
  CHECK(m.retired() == 8);  // 6 commits + 2 permanent failures
  CHECK(m.abort_rate_now() == doctest::Approx(0.4));

  const MetricsSnapshot s = m.snapshot(2.0);
  CHECK(s.abort_rate == doctest::Approx(4.0 / 10.0));
  CHECK(s.tps == doctest::Approx(3.0));
  CHECK(s.read_aborts() == 1);
  CHECK(s.write_aborts() == 3);  // write-conflict + lock-conflict
  CHECK(s.read_validation_aborts == 1);
  CHECK(s.write_conflict_aborts == 2);
  CHECK(s.lock_conflict_aborts == 1);
}

TEST_CASE("per-second buckets partition commits by time since the run start") {
  Metrics m(1);
  const uint64_t start = 50 * kNsPerSec;
  m.set_start_ns(start);
  commit_n(m, 3, 1000, start + kNsPerSec / 2);          // second 0
  commit_n(m, 5, 1000, start + kNsPerSec + 1);          // second 1
  commit_n(m, 2, 1000, start + 3 * kNsPerSec + 7);      // second 3
  m.record_abort(AttemptStatus::kAbortWriteConflict, 0, start + kNsPerSec + 2);

  const MetricsSnapshot s = m.snapshot(3.5);
  REQUIRE(s.commits_per_sec.size() == 5);  // ceil(3.5) + 1 trailing partial
  CHECK(s.commits_per_sec[0] == 3);
  CHECK(s.commits_per_sec[1] == 5);
  CHECK(s.commits_per_sec[2] == 0);
  CHECK(s.commits_per_sec[3] == 2);
  CHECK(s.aborts_per_sec[1] == 1);

  uint64_t total = 0;
  for (uint64_t c : s.commits_per_sec) total += c;
  CHECK(total == m.commits());
}

TEST_CASE("per-type tallies split commits and aborts by transaction type") {
  Metrics m(1);
  m.set_start_ns(0);
  commit_n(m, 4, 1000, 0, /*type=*/0);
  commit_n(m, 3, 1000, 0, /*type=*/1);
  m.record_abort(AttemptStatus::kAbortWriteConflict, 1, 0);
  m.record_abort(AttemptStatus::kAbortWriteConflict, 1, 0);

  const MetricsSnapshot s = m.snapshot(1.0);
  CHECK(s.commits_by_type[0] == 4);
  CHECK(s.commits_by_type[1] == 3);
  CHECK(s.aborts_by_type[0] == 0);
  CHECK(s.aborts_by_type[1] == 2);
}

TEST_CASE("stolen fraction is stolen work over retired transactions") {
  Metrics m(2);
  m.set_start_ns(0);
  commit_n(m, 6, 1000, 0, 0, /*stolen=*/false);
  commit_n(m, 3, 1000, 0, 0, /*stolen=*/true);
  m.record_failed_no_retry(/*stolen=*/true);

  const MetricsSnapshot s = m.snapshot(1.0);
  CHECK(s.stolen == 4);
  CHECK(s.stolen_fraction == doctest::Approx(0.4));
}

TEST_CASE("zero activity snapshots cleanly to zeros") {
  Metrics m(4);
  const MetricsSnapshot s = m.snapshot(0.0);
  CHECK(s.tps == 0.0);
  CHECK(s.abort_rate == 0.0);
  CHECK(s.mean_rt_us == 0.0);
  CHECK(s.p99_rt_us == 0.0);
  CHECK(s.stolen_fraction == 0.0);
}

TEST_CASE("repetition aggregates follow the sample-deviation formulas") {
  CHECK(mean_of({}) == doctest::Approx(0.0));
  CHECK(mean_of({4.0}) == doctest::Approx(4.0));
  CHECK(mean_of({1.0, 2.0, 3.0, 4.0}) == doctest::Approx(2.5));

  CHECK(rse_of({}) == doctest::Approx(0.0));
  CHECK(rse_of({5.0}) == doctest::Approx(0.0));
  // {8, 12}: mean 10, sample stdev sqrt(8) -> rse sqrt(8)/(10*sqrt(2)) = 0.2.
  CHECK(rse_of({8.0, 12.0}) == doctest::Approx(0.2));
  // Identical repetitions have zero spread.
  CHECK(rse_of({3.0, 3.0, 3.0}) == doctest::Approx(0.0));
  // A zero mean cannot be normalized against.
  CHECK(rse_of({-1.0, 1.0}) == doctest::Approx(0.0));
}

TEST_CASE("the running response-time total feeds rolling means by deltas") {
  Metrics m(1);
  m.set_start_ns(0);
  CHECK(m.response_ns_total() == 0);
  m.record_commit(0, 1500, false, 0, 0);
  m.record_commit(0, 2500, false, 0, 0);
  CHECK(m.response_ns_total() == 4000);
}
