#include <cmath>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "txnlab/clock.hpp"
#include "txnlab/queue_state.hpp"

using namespace txnlab;

namespace {

std::set<Reference> refs_of(std::initializer_list<const char*> tokens) {
  std::set<Reference> out;
  for (const char* t : tokens) out.insert(Reference{t});
  return out;
}

constexpr uint64_t kT0 = 10 * kNsPerSec;

}  // namespace

TEST_CASE("enqueue tracks per-queue counts, cumulative totals, and queue loads") {
  State st(3);
  st.on_enqueue(refs_of({"a=1", "b=2"}), 0, kT0);
  st.on_enqueue(refs_of({"a=1"}), 2, kT0);
  st.on_enqueue(refs_of({"a=1"}), 2, kT0);

  CHECK(st.queue_counts(Reference{"a=1"}) == std::vector<uint32_t>{1, 0, 2});
  CHECK(st.queue_counts(Reference{"b=2"}) == std::vector<uint32_t>{1, 0, 0});
  CHECK(st.queue_counts(Reference{"zzz=9"}) == std::vector<uint32_t>{0, 0, 0});

  auto entry = st.find(Reference{"a=1"});
  REQUIRE(entry != nullptr);
  CHECK(entry->total.load() == 3);

  // Queue loads count one unit per (transaction, reference) pair.
  CHECK(st.total_per_queue() == std::vector<uint64_t>{2, 0, 2});
  CHECK(st.size() == 2);
}

TEST_CASE("arrival rate decays with half-life one second and adds one per event") {
  State st(1);
  st.on_enqueue(refs_of({"a=1"}), 0, kT0);
  auto entry = st.find(Reference{"a=1"});
  REQUIRE(entry != nullptr);
  CHECK(entry->rate.load() == doctest::Approx(1.0));

  // One second later the stored 1.0 has halved before the new event adds 1.
  st.on_enqueue(refs_of({"a=1"}), 0, kT0 + kNsPerSec);
  CHECK(entry->rate.load() == doctest::Approx(1.5));

  // Reading two seconds after the last touch halves 1.5 twice.
  CHECK(entry->rate_at(kT0 + 3 * kNsPerSec) == doctest::Approx(0.375));
  // Reading at (or before) the last touch applies no decay.
  CHECK(entry->rate_at(kT0 + kNsPerSec) == doctest::Approx(1.5));
}

TEST_CASE("argmax follows the strictly greatest count with ties kept at the lower queue") {
  State st(3);
  st.on_enqueue(refs_of({"a=1"}), 2, kT0);
  auto entry = st.find(Reference{"a=1"});
  REQUIRE(entry != nullptr);
  CHECK(entry->argmax.load() == 2);

  // Queue 0 ties queue 2 at one enqueue each; the lower index wins the tie.
  st.on_enqueue(refs_of({"a=1"}), 0, kT0);
  CHECK(entry->argmax.load() == 0);

  // Queue 2 pulls strictly ahead again.
  st.on_enqueue(refs_of({"a=1"}), 2, kT0);
  CHECK(entry->argmax.load() == 2);

  // A tie arriving at a HIGHER index never displaces the current holder.
  State st2(3);
  st2.on_enqueue(refs_of({"b=1"}), 0, kT0);
  st2.on_enqueue(refs_of({"b=1"}), 1, kT0);
  auto e2 = st2.find(Reference{"b=1"});
  REQUIRE(e2 != nullptr);
  CHECK(e2->argmax.load() == 0);
}

TEST_CASE("least loaded queue is the smallest total with ties at the lowest index") {
  State st(3);
  CHECK(st.least_loaded_queue() == 0);
  st.on_enqueue(refs_of({"a=1"}), 0, kT0);
  st.on_enqueue(refs_of({"b=1"}), 2, kT0);
  CHECK(st.least_loaded_queue() == 1);
  st.on_enqueue(refs_of({"c=1"}), 1, kT0);
  CHECK(st.least_loaded_queue() == 0);
}

TEST_CASE("stale eviction keeps hot, frequent, or uncrowded entries and drops the rest") {
  State st(2);
  // "hot=1": enqueued repeatedly just before the eviction pass - high rate.
  // "bulk=1": enqueued often but long ago - high total, rate fully decayed.
  // "cold_q0=1" / "cold_q1=1": one old enqueue each; queue 1 stays uncrowded.
  for (int i = 0; i < 6; ++i) st.on_enqueue(refs_of({"bulk=1"}), 0, kT0);
  st.on_enqueue(refs_of({"cold_q0=1"}), 0, kT0);
  st.on_enqueue(refs_of({"cold_q1=1"}), 1, kT0);
  const uint64_t late = kT0 + 30 * kNsPerSec;
  for (int i = 0; i < 3; ++i) st.on_enqueue(refs_of({"hot=1"}), 0, late);

  EvictConfig cfg;
  cfg.rate_min = 0.5;
  cfg.total_min = 5;
  cfg.hot_override = 5;  // totals: q0 = 10 > 5 crowded, q1 = 1 <= 5 uncrowded

  const size_t evicted = st.evict_stale(late, cfg);
  CHECK(evicted == 1);
  CHECK(st.find(Reference{"hot=1"}) != nullptr);      // kept: rate >= rate_min
  CHECK(st.find(Reference{"bulk=1"}) != nullptr);     // kept: total >= total_min
  CHECK(st.find(Reference{"cold_q1=1"}) != nullptr);  // kept: its queue is uncrowded
  CHECK(st.find(Reference{"cold_q0=1"}) == nullptr);  // cold, rare, crowded queue

  // The evicted entry's contribution is subtracted from the queue loads.
  CHECK(st.total_per_queue() == std::vector<uint64_t>{9, 1});
}

TEST_CASE("the default crowding threshold is the 75th percentile of queue loads") {
  State st(4);
  // Build loads {4, 8, 2, 6}; sorted {2, 4, 6, 8}; nearest-rank 75th pct = 6.
  auto load = [&](const char* token, uint32_t queue, int n) {
    for (int i = 0; i < n; ++i) st.on_enqueue(refs_of({token}), queue, kT0);
  };
  load("q0=1", 0, 4);
  load("q1=1", 1, 8);
  load("q2=1", 2, 2);
  load("q3=1", 3, 6);
  // Two cold singletons whose own enqueue is included in the final loads.
  st.on_enqueue(refs_of({"victim=1"}), 1, kT0);   // queue 1 load 9 > threshold
  st.on_enqueue(refs_of({"keeper=1"}), 2, kT0);   // queue 2 load 3 <= threshold

  // Loads are {4, 9, 3, 6}; sorted {3, 4, 6, 9}; rank ceil(4*0.75)=3 -> 6.
  EvictConfig cfg;
  cfg.rate_min = 100.0;   // nothing is hot enough
  cfg.total_min = 2;      // singletons are rare; the 4..9-count carriers are not

  const uint64_t late = kT0 + 60 * kNsPerSec;
  const size_t evicted = st.evict_stale(late, cfg);
  CHECK(evicted == 1);
  CHECK(st.find(Reference{"victim=1"}) == nullptr);
  CHECK(st.find(Reference{"keeper=1"}) != nullptr);
}

TEST_CASE("the cap evicts the coldest entries first and leaves exactly cap entries") {
  State st(1);
  st.on_enqueue(refs_of({"old=1"}), 0, kT0);
  st.on_enqueue(refs_of({"mid=1"}), 0, kT0 + 5 * kNsPerSec);
  st.on_enqueue(refs_of({"new=1"}), 0, kT0 + 10 * kNsPerSec);

  const size_t evicted = st.enforce_cap(kT0 + 10 * kNsPerSec, 2);
  CHECK(evicted == 1);
  CHECK(st.size() == 2);
  CHECK(st.find(Reference{"old=1"}) == nullptr);
  CHECK(st.find(Reference{"mid=1"}) != nullptr);
  CHECK(st.find(Reference{"new=1"}) != nullptr);
  CHECK(st.total_per_queue() == std::vector<uint64_t>{2});

  // Already under the cap: nothing happens.
  CHECK(st.enforce_cap(kT0 + 10 * kNsPerSec, 2) == 0);
}

TEST_CASE("state snapshot lists counts, rate, total, and argmax per reference") {
  State st(2);
  st.on_enqueue(refs_of({"b=2"}), 1, kT0);
  st.on_enqueue(refs_of({"a=1"}), 0, kT0);
  st.on_enqueue(refs_of({"a=1"}), 0, kT0);

  std::ostringstream out;
  st.snapshot_csv(out);
  CHECK(out.str() ==
        "reference,count_q0,count_q1,rate_r,total_t,argmax_q\n"
        "a=1,2,0,2.000000,2,0\n"
        "b=2,0,1,1.000000,1,1\n");
}
