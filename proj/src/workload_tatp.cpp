#include <algorithm>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "txnlab/workload.hpp"

namespace txnlab {
namespace {

constexpr int64_t kBaseSubscribers = 10000;
constexpr int64_t kHotSubscribers = 20;
constexpr int64_t kHotPercent = 90;
constexpr int64_t kStartTimes[] = {0, 8, 16};

// Only the subscriber id carries conflict signal in this benchmark: slot-type
// attributes (ai_type, sf_type, start_time) and the payload columns are
// unlabeled, so they execute normally but emit no reference.
Predicate key_eq(std::string attr, int64_t value) {
  return Predicate{std::move(attr), Value{value}, /*labeled=*/true};
}

Predicate aux_eq(std::string attr, int64_t value) {
  return Predicate{std::move(attr), Value{value}, /*labeled=*/false};
}

ColumnWrite aux_put(std::string attr, int64_t value) {
  return ColumnWrite{std::move(attr), Value{value}, WriteExpr::kSet, /*labeled=*/false};
}

int64_t ai_count(int64_t s) { return s % 4 + 1; }
int64_t sf_count(int64_t s) { return (s + 1) % 4 + 1; }
int64_t cf_count(int64_t s, int64_t sf) { return (s + sf) % 4; }  // 0..3 slots

class TatpWorkload final : public Workload {
 public:
  explicit TatpWorkload(const WorkloadConfig& cfg)
      : subscribers_(static_cast<int64_t>(scaled_count(kBaseSubscribers, cfg.scale))) {
    domains_.add_identity("s_id");
    for (const char* attr : {"ai_type", "sf_type", "start_time", "end_time", "numberx",
                             "bit_1", "vlr_location", "data_a", "data1", "is_active"}) {
      domains_.add_identity(attr);
    }
  }

  const std::string& name() const override {
    static const std::string kName = "tatp";
    return kName;
  }

  Schema make_schema() const override {
    Schema schema;
    schema.add_table({"subscriber", {"s_id"}});
    schema.add_table({"access_info", {"s_id", "ai_type"}});
    schema.add_table({"special_facility", {"s_id", "sf_type"}});
    schema.add_table({"call_forwarding", {"s_id", "sf_type", "start_time"}});
    return schema;
  }

  void populate(Database& db) override {
    const size_t subscriber_id = db.schema().table_id("subscriber");
    const size_t access_info_id = db.schema().table_id("access_info");
    const size_t special_facility_id = db.schema().table_id("special_facility");
    const size_t call_forwarding_id = db.schema().table_id("call_forwarding");
    for (int64_t s = 1; s <= subscribers_; ++s) {
      db.seed_row(subscriber_id, RowKey::of(s),
                  {{"bit_1", Value{s % 2}}, {"vlr_location", Value{(s * 131) % 100000}}});
      for (int64_t t = 1; t <= ai_count(s); ++t) {
        db.seed_row(access_info_id, RowKey::of(s, t), {{"data1", Value{(s * 5 + t) % 256}}});
      }
      for (int64_t t = 1; t <= sf_count(s); ++t) {
        db.seed_row(special_facility_id, RowKey::of(s, t),
                    {{"is_active", Value{(s * 3 + t) % 100 < 85 ? int64_t{1} : int64_t{0}}},
                     {"data_a", Value{(s + t * 7) % 256}}});
        for (int64_t slot = 0; slot < cf_count(s, t); ++slot) {
          const int64_t start = kStartTimes[slot];
          db.seed_row(call_forwarding_id, RowKey::of(s, t, start),
                      {{"end_time", Value{start + 8}},
                       {"numberx", Value{(s * 10 + t) % 100000}}});
        }
      }
    }
  }

  std::unique_ptr<Transaction> generate(std::mt19937_64& rng, uint64_t txn_id,
                                        double zipf_theta) override {
    auto txn = std::make_unique<Transaction>();
    txn->txn_id = txn_id;
    const int64_t s = draw_subscriber(rng, zipf_theta);
    txn->partition_key = s;

    const uint64_t p = rng() % 100;
    if (p < 3) {
      txn->txn_type = kGetAccessData;
      build_get_access_data(*txn, rng, s);
    } else if (p < 6) {
      txn->txn_type = kGetNewDestination;
      build_get_new_destination(*txn, rng, s);
    } else if (p < 46) {
      txn->txn_type = kGetSubscriberData;
      build_get_subscriber_data(*txn, s);
    } else if (p < 48) {
      txn->txn_type = kInsertCallForwarding;
      build_insert_call_forwarding(*txn, rng, s);
    } else if (p < 50) {
      txn->txn_type = kDeleteCallForwarding;
      build_delete_call_forwarding(*txn, rng, s);
    } else if (p < 60) {
      txn->txn_type = kUpdateSubscriberData;
      build_update_subscriber_data(*txn, rng, s);
    } else {
      txn->txn_type = kUpdateLocation;
      build_update_location(*txn, rng, s);
    }
    return txn;
  }

  const DomainMap& domains() const override { return domains_; }
  size_t txn_type_count() const override { return 7; }
  std::string txn_type_name(int32_t type) const override {
    switch (type) {
      case kGetAccessData: return "GetAccessData";
      case kGetNewDestination: return "GetNewDestination";
      case kGetSubscriberData: return "GetSubscriberData";
      case kInsertCallForwarding: return "InsertCallForwarding";
      case kDeleteCallForwarding: return "DeleteCallForwarding";
      case kUpdateSubscriberData: return "UpdateSubscriberData";
      case kUpdateLocation: return "UpdateLocation";
      default: return "unknown";
    }
  }

  int64_t subscribers() const { return subscribers_; }

 private:
  static constexpr int32_t kGetAccessData = 0;
  static constexpr int32_t kGetNewDestination = 1;
  static constexpr int32_t kGetSubscriberData = 2;
  static constexpr int32_t kInsertCallForwarding = 3;
  static constexpr int32_t kDeleteCallForwarding = 4;
  static constexpr int32_t kUpdateSubscriberData = 5;
  static constexpr int32_t kUpdateLocation = 6;

  int64_t draw_subscriber(std::mt19937_64& rng, double zipf_theta) {
    if (zipf_theta > 0.0) {
      return zipf_for(zipf_theta, static_cast<size_t>(subscribers_)).draw(rng);
    }
    const int64_t hot_span = std::min(kHotSubscribers, subscribers_);
    if (rng() % 100 < static_cast<uint64_t>(kHotPercent)) {
      return static_cast<int64_t>(rng() % hot_span) + 1;
    }
    return static_cast<int64_t>(rng() % subscribers_) + 1;
  }

  static int64_t draw_slot_type(std::mt19937_64& rng) {
    return static_cast<int64_t>(rng() % 4) + 1;
  }

  static int64_t draw_start_time(std::mt19937_64& rng) { return kStartTimes[rng() % 3]; }

  void build_get_subscriber_data(Transaction& txn, int64_t s) {
    txn.params = {static_cast<int32_t>(s)};
    txn.statements.push_back(
        {StatementKind::kSelect, "subscriber", {key_eq("s_id", s)}, {}, {}});
  }

  void build_get_access_data(Transaction& txn, std::mt19937_64& rng, int64_t s) {
    const int64_t ai = draw_slot_type(rng);
    txn.params = {static_cast<int32_t>(s), static_cast<int32_t>(ai)};
    txn.statements.push_back({StatementKind::kSelect,
                              "access_info",
                              {key_eq("s_id", s), aux_eq("ai_type", ai)},
                              {},
                              {"data1"}});
  }

  void build_get_new_destination(Transaction& txn, std::mt19937_64& rng, int64_t s) {
    const int64_t sf = draw_slot_type(rng);
    const int64_t start = draw_start_time(rng);
    txn.params = {static_cast<int32_t>(s), static_cast<int32_t>(sf),
                  static_cast<int32_t>(start)};
    auto& stmts = txn.statements;
    stmts.push_back({StatementKind::kSelect,
                     "special_facility",
                     {key_eq("s_id", s), aux_eq("sf_type", sf), aux_eq("is_active", 1)},
                     {},
                     {}});
    stmts.push_back({StatementKind::kSelect,
                     "call_forwarding",
                     {key_eq("s_id", s), aux_eq("sf_type", sf), aux_eq("start_time", start)},
                     {},
                     {}});
  }

  void build_insert_call_forwarding(Transaction& txn, std::mt19937_64& rng, int64_t s) {
    const int64_t sf = draw_slot_type(rng);
    const int64_t start = draw_start_time(rng);
    txn.params = {static_cast<int32_t>(s), static_cast<int32_t>(sf),
                  static_cast<int32_t>(start)};
    txn.statements.push_back(
        {StatementKind::kInsert,
         "call_forwarding",
         {},
         {ColumnWrite{"s_id", Value{s}, WriteExpr::kSet, /*labeled=*/true},
          aux_put("sf_type", sf), aux_put("start_time", start), aux_put("end_time", start + 8),
          aux_put("numberx", (s * 10 + sf) % 100000)},
         {}});
  }

  void build_delete_call_forwarding(Transaction& txn, std::mt19937_64& rng, int64_t s) {
    const int64_t sf = draw_slot_type(rng);
    const int64_t start = draw_start_time(rng);
    txn.params = {static_cast<int32_t>(s), static_cast<int32_t>(sf),
                  static_cast<int32_t>(start)};
    txn.statements.push_back(
        {StatementKind::kDelete,
         "call_forwarding",
         {key_eq("s_id", s), aux_eq("sf_type", sf), aux_eq("start_time", start)},
         {},
         {}});
  }

  void build_update_subscriber_data(Transaction& txn, std::mt19937_64& rng, int64_t s) {
    const int64_t sf = draw_slot_type(rng);
    txn.params = {static_cast<int32_t>(s), static_cast<int32_t>(sf)};
    auto& stmts = txn.statements;
    stmts.push_back({StatementKind::kUpdate,
                     "subscriber",
                     {key_eq("s_id", s)},
                     {aux_put("bit_1", static_cast<int64_t>(rng() % 2))},
                     {}});
    stmts.push_back({StatementKind::kUpdate,
                     "special_facility",
                     {key_eq("s_id", s), aux_eq("sf_type", sf)},
                     {aux_put("data_a", static_cast<int64_t>(rng() % 256))},
                     {}});
  }

  void build_update_location(Transaction& txn, std::mt19937_64& rng, int64_t s) {
    txn.params = {static_cast<int32_t>(s)};
    txn.statements.push_back({StatementKind::kUpdate,
                              "subscriber",
                              {key_eq("s_id", s)},
                              {aux_put("vlr_location", static_cast<int64_t>(rng() % 1000000))},
                              {}});
  }

  const int64_t subscribers_;
  DomainMap domains_;
};

}  // namespace

std::unique_ptr<Workload> make_tatp_workload(const WorkloadConfig& cfg) {
  return std::make_unique<TatpWorkload>(cfg);
}

}  // namespace txnlab
