#include <random>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "txnlab/clock.hpp"
#include "txnlab/history.hpp"
#include "txnlab/policy.hpp"
#include "txnlab/queue_state.hpp"

using namespace txnlab;

namespace {

constexpr uint64_t kT0 = 100 * kNsPerSec;

std::set<Reference> refs_of(std::initializer_list<const char*> tokens) {
  std::set<Reference> out;
  for (const char* t : tokens) out.insert(Reference{t});
  return out;
}

void record_n(History& h, const char* token, int aborts, int commits) {
  const auto refs = refs_of({token});
  for (int i = 0; i < aborts; ++i) h.record_abort(refs);
  for (int i = 0; i < commits; ++i) h.record_commit(refs);
}

// Stock-table fixture: abort/commit history for five single-attribute
// references plus a three-queue occupancy built from six enqueues.
struct StockFixture {
  History history;
  State state{3};

  StockFixture() {
    record_n(history, "s_quantity=6", 20, 60);
    record_n(history, "s_quantity=7", 40, 20);
    record_n(history, "s_i_id=1", 20, 20);
    record_n(history, "s_i_id=2", 0, 20);
    record_n(history, "s_w_id=5", 20, 20);

    state.on_enqueue(refs_of({"s_quantity=7", "s_i_id=1", "s_w_id=5"}), 0, kT0);
    state.on_enqueue(refs_of({"s_quantity=7", "s_i_id=1", "s_w_id=5"}), 0, kT0);
    state.on_enqueue(refs_of({"s_quantity=6", "s_i_id=2", "s_w_id=5"}), 1, kT0);
    state.on_enqueue(refs_of({"s_quantity=6", "s_i_id=2", "s_w_id=5"}), 2, kT0);
    state.on_enqueue(refs_of({"s_quantity=7"}), 1, kT0);
    state.on_enqueue(refs_of({"s_quantity=7"}), 2, kT0);
  }

  // The transaction being scheduled against this fixture:
  // UPDATE stock SET s_quantity = 6 WHERE s_i_id = 2 AND s_w_id = 5.
  std::set<Reference> incoming() const {
    return refs_of({"s_quantity=6", "s_i_id=2", "s_w_id=5"});
  }
};

// Canonical-representation fixture over the domains of a wider schema:
// five references, three queues, three enqueues.
struct CanonicalFixture {
  History history;
  State state{3};

  CanonicalFixture() {
    record_n(history, "i_id=2", 10, 10);
    record_n(history, "o_id=10", 10, 10);
    record_n(history, "c_id=11", 10, 10);
    record_n(history, "w_id=5", 30, 10);
    record_n(history, "s_quantity=7", 20, 20);

    state.on_enqueue(refs_of({"s_quantity=7", "i_id=2", "w_id=5"}), 0, kT0);
    state.on_enqueue(refs_of({"c_id=11", "w_id=5"}), 1, kT0);
    state.on_enqueue(refs_of({"o_id=10", "c_id=11", "w_id=5"}), 2, kT0);
  }

  // Canonical references of the same stock update as the literal fixture.
  std::set<Reference> incoming() const {
    return refs_of({"s_quantity=6", "i_id=2", "w_id=5"});
  }
};

}  // namespace

TEST_CASE("the six-enqueue stock fixture reproduces its occupancy table") {
  StockFixture fx;

  CHECK(fx.state.queue_counts(Reference{"s_i_id=1"}) == std::vector<uint32_t>{2, 0, 0});
  CHECK(fx.state.queue_counts(Reference{"s_w_id=5"}) == std::vector<uint32_t>{2, 1, 1});
  CHECK(fx.state.queue_counts(Reference{"s_i_id=2"}) == std::vector<uint32_t>{0, 1, 1});
  CHECK(fx.state.queue_counts(Reference{"s_quantity=7"}) == std::vector<uint32_t>{2, 1, 1});
  CHECK(fx.state.queue_counts(Reference{"s_quantity=6"}) == std::vector<uint32_t>{0, 1, 1});

  auto total_of = [&](const char* token) {
    auto e = fx.state.find(Reference{token});
    REQUIRE(e != nullptr);
    return e->total.load();
  };
  auto argmax_of = [&](const char* token) {
    auto e = fx.state.find(Reference{token});
    REQUIRE(e != nullptr);
    return e->argmax.load();
  };
  CHECK(total_of("s_i_id=1") == 2);
  CHECK(total_of("s_w_id=5") == 4);
  CHECK(total_of("s_i_id=2") == 2);
  CHECK(total_of("s_quantity=7") == 4);
  CHECK(total_of("s_quantity=6") == 2);
  CHECK(argmax_of("s_i_id=1") == 0);
  CHECK(argmax_of("s_w_id=5") == 0);
  CHECK(argmax_of("s_i_id=2") == 1);
  CHECK(argmax_of("s_quantity=7") == 0);
  CHECK(argmax_of("s_quantity=6") == 1);

  CHECK(fx.state.total_per_queue() == std::vector<uint64_t>{6, 4, 4});
}

TEST_CASE("the three-enqueue canonical fixture reproduces its occupancy table") {
  CanonicalFixture fx;

  CHECK(fx.state.queue_counts(Reference{"i_id=2"}) == std::vector<uint32_t>{1, 0, 0});
  CHECK(fx.state.queue_counts(Reference{"w_id=5"}) == std::vector<uint32_t>{1, 1, 1});
  CHECK(fx.state.queue_counts(Reference{"c_id=11"}) == std::vector<uint32_t>{0, 1, 1});
  CHECK(fx.state.queue_counts(Reference{"s_quantity=7"}) == std::vector<uint32_t>{1, 0, 0});
  CHECK(fx.state.queue_counts(Reference{"o_id=10"}) == std::vector<uint32_t>{0, 0, 1});

  auto entry = fx.state.find(Reference{"w_id=5"});
  REQUIRE(entry != nullptr);
  CHECK(entry->total.load() == 3);
  CHECK(entry->argmax.load() == 0);
  auto cf = fx.state.find(Reference{"c_id=11"});
  REQUIRE(cf != nullptr);
  CHECK(cf->total.load() == 2);
  CHECK(cf->argmax.load() == 1);
  auto od = fx.state.find(Reference{"o_id=10"});
  REQUIRE(od != nullptr);
  CHECK(od->total.load() == 1);
  CHECK(od->argmax.load() == 2);

  CHECK(fx.state.total_per_queue() == std::vector<uint64_t>{3, 2, 3});
}

TEST_CASE("count weights are abort counts and fraction weights are abort shares") {
  StockFixture fx;
  CHECK(weigh(Reference{"s_quantity=7"}, WeightKind::kCount, fx.history) == doctest::Approx(40.0));
  CHECK(weigh(Reference{"s_i_id=2"}, WeightKind::kCount, fx.history) == doctest::Approx(0.0));
  CHECK(weigh(Reference{"s_quantity=6"}, WeightKind::kFraction, fx.history) ==
        doctest::Approx(0.25));
  CHECK(weigh(Reference{"s_w_id=5"}, WeightKind::kFraction, fx.history) == doctest::Approx(0.5));
  CHECK(weigh(Reference{"nowhere=1"}, WeightKind::kFraction, fx.history) == doctest::Approx(0.0));
}

TEST_CASE("count-sum scoring ties every queue and falls back to the least loaded") {
  StockFixture fx;
  const QueueScores s = score_queues(fx.incoming(), WeightKind::kCount, CombineKind::kSum,
                                     fx.history, fx.state);
  CHECK(s.scores == std::vector<double>{40.0, 40.0, 40.0});
  CHECK(s.used_default);
  // Loads are {6, 4, 4}: the 4-4 tie resolves to the lower index.
  CHECK(s.chosen == 1);
}

TEST_CASE("fraction-sum scoring picks the highest-scoring queue outright") {
  StockFixture fx;
  const QueueScores s = score_queues(fx.incoming(), WeightKind::kFraction, CombineKind::kSum,
                                     fx.history, fx.state);
  REQUIRE(s.scores.size() == 3);
  CHECK(s.scores[0] == doctest::Approx(1.0));
  CHECK(s.scores[1] == doctest::Approx(0.75));
  CHECK(s.scores[2] == doctest::Approx(0.75));
  CHECK_FALSE(s.used_default);
  CHECK(s.chosen == 0);
}

TEST_CASE("max selection keeps one reference with weight ties at the smallest token") {
  StockFixture fx;
  const auto selected =
      select_refs(fx.incoming(), WeightKind::kCount, CombineKind::kMax, fx.history);
  REQUIRE(selected.size() == 1);
  // s_quantity=6 and s_w_id=5 tie at 20 aborts; the smaller token wins.
  CHECK(selected[0].first.token == "s_quantity=6");
  CHECK(selected[0].second == doctest::Approx(20.0));

  // Sum keeps all references, sorted by token.
  const auto all = select_refs(fx.incoming(), WeightKind::kCount, CombineKind::kSum, fx.history);
  REQUIRE(all.size() == 3);
  CHECK(all[0].first.token == "s_i_id=2");
  CHECK(all[1].first.token == "s_quantity=6");
  CHECK(all[2].first.token == "s_w_id=5");
}

TEST_CASE("scoring a single retained warehouse reference concentrates on its home queue") {
  StockFixture fx;
  const QueueScores s = score_selected({{Reference{"s_w_id=5"}, 20.0}}, fx.state);
  CHECK(s.scores == std::vector<double>{40.0, 20.0, 20.0});
  CHECK_FALSE(s.used_default);
  CHECK(s.chosen == 0);
}

TEST_CASE("count-max full pipeline breaks its partial tie toward the emptier queue") {
  StockFixture fx;
  const QueueScores s = score_queues(fx.incoming(), WeightKind::kCount, CombineKind::kMax,
                                     fx.history, fx.state);
  // Retained s_quantity=6 (weight 20) lives only on queues 1 and 2.
  CHECK(s.scores == std::vector<double>{0.0, 20.0, 20.0});
  CHECK_FALSE(s.used_default);
  // Maxima tie on queues 1 and 2; loads tie at 4 each; lowest index wins.
  CHECK(s.chosen == 1);
}

TEST_CASE("fraction-max on the canonical fixture ties all queues and defaults") {
  CanonicalFixture fx;
  const auto selected =
      select_refs(fx.incoming(), WeightKind::kFraction, CombineKind::kMax, fx.history);
  REQUIRE(selected.size() == 1);
  CHECK(selected[0].first.token == "w_id=5");
  CHECK(selected[0].second == doctest::Approx(0.75));

  const QueueScores s = score_selected(selected, fx.state);
  REQUIRE(s.scores.size() == 3);
  CHECK(s.scores[0] == doctest::Approx(0.75));
  CHECK(s.scores[1] == doctest::Approx(0.75));
  CHECK(s.scores[2] == doctest::Approx(0.75));
  CHECK(s.used_default);
  // Loads are {3, 2, 3}: queue 1 is the least loaded.
  CHECK(s.chosen == 1);
}

TEST_CASE("an empty reference set and an all-zero-weight set both default") {
  StockFixture fx;
  const QueueScores empty = score_queues({}, WeightKind::kCount, CombineKind::kSum, fx.history,
                                         fx.state);
  CHECK(empty.used_default);
  CHECK(empty.chosen == 1);

  const QueueScores zero = score_queues(refs_of({"s_i_id=2"}), WeightKind::kCount,
                                        CombineKind::kSum, fx.history, fx.state);
  CHECK(zero.scores == std::vector<double>{0.0, 0.0, 0.0});
  CHECK(zero.used_default);
  CHECK(zero.chosen == 1);
}

TEST_CASE("policy strings round-trip through parse and label") {
  const PolicyConfig r = PolicyConfig::parse("random");
  CHECK(r.mode == PolicyMode::kRandom);
  CHECK(r.label() == "random");

  const PolicyConfig h = PolicyConfig::parse("hard");
  CHECK(h.mode == PolicyMode::kHardPartition);
  CHECK(h.label() == "hard");

  for (const char* spec :
       {"count/sum/literal/single", "count/max/canonical/all", "fraction/sum/canonical/single",
        "fraction/max/literal/all"}) {
    const PolicyConfig p = PolicyConfig::parse(spec);
    CHECK(p.mode == PolicyMode::kIntelligent);
    CHECK(p.label() == spec);
  }

  CHECK_THROWS_AS(PolicyConfig::parse("count/max"), ConfigError);
  CHECK_THROWS_AS(PolicyConfig::parse("count/max/canonical/everything"), ConfigError);
  CHECK_THROWS_AS(PolicyConfig::parse("weird"), ConfigError);
  CHECK_THROWS_AS(PolicyConfig::parse("count/min/canonical/single"), ConfigError);
  CHECK_THROWS_AS(PolicyConfig::parse("votes/max/canonical/single"), ConfigError);
}

TEST_CASE("random dispatch stays in range and hard partitioning is key modulo queues") {
  std::mt19937_64 rng(7);
  Transaction txn;
  PolicyConfig random;  // defaults to random mode

  for (int i = 0; i < 200; ++i) {
    CHECK(choose_queue(txn, random, 4, nullptr, nullptr, rng, kT0) < 4);
  }

  PolicyConfig hard;
  hard.mode = PolicyMode::kHardPartition;
  txn.partition_key = 7;
  CHECK(choose_queue(txn, hard, 4, nullptr, nullptr, rng, kT0) == 3);
  txn.partition_key = 8;
  CHECK(choose_queue(txn, hard, 4, nullptr, nullptr, rng, kT0) == 0);

  Transaction keyless;
  CHECK_THROWS_AS(choose_queue(keyless, hard, 4, nullptr, nullptr, rng, kT0), ConfigError);
}

TEST_CASE("an intelligent choice is recorded into the occupancy state") {
  StockFixture fx;
  std::mt19937_64 rng(7);
  Transaction txn;
  txn.refs = fx.incoming();

  PolicyConfig p;
  p.mode = PolicyMode::kIntelligent;
  p.weight = WeightKind::kFraction;
  p.combine = CombineKind::kSum;

  QueueScores scores;
  const uint32_t q = choose_queue(txn, p, 3, &fx.history, &fx.state, rng, kT0, &scores);
  CHECK(q == 0);
  CHECK(scores.chosen == 0);
  // The three incoming references landed on queue 0.
  CHECK(fx.state.queue_counts(Reference{"s_quantity=6"}) == std::vector<uint32_t>{1, 1, 1});
  CHECK(fx.state.total_per_queue() == std::vector<uint64_t>{9, 4, 4});
}
