#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "txnlab/workload.hpp"

namespace txnlab {
namespace {

// Districts are structural (d_id always spans 1..10 per warehouse); the scale
// factor shrinks the bulk tables instead: items, customers, and the seeded
// order history.
constexpr int64_t kDistrictsPerWarehouse = 10;
constexpr int64_t kLinesPerSeededOrder = 10;
constexpr int64_t kBaseWarehouses = 11;
constexpr int64_t kBaseItems = 10000;
constexpr int64_t kBaseCustomersPerDistrict = 300;
constexpr int64_t kBaseOrdersPerDistrict = 300;

// Per-transaction conflict markers: every stock write in a NewOrder sets
// s_quantity to one literal drawn per transaction, and every money column in
// a Payment moves by one literal amount drawn per transaction. Ten distinct
// values give the reference space collisions without letting any one literal
// accumulate more history weight than a warehouse id (3-4 warehouses split
// all traffic; ten quantities split only new orders), so warehouse locality
// stays the strongest learnable signal.
constexpr int64_t kMaxQuantity = 10;
constexpr int64_t kMaxPaymentAmount = 10;

Predicate eq(std::string attr, int64_t value, bool labeled = true) {
  return Predicate{std::move(attr), Value{value}, labeled};
}

ColumnWrite put(std::string attr, int64_t value, WriteExpr expr = WriteExpr::kSet,
                bool labeled = true) {
  return ColumnWrite{std::move(attr), Value{value}, expr, labeled};
}

class TpccWorkload final : public Workload {
 public:
  explicit TpccWorkload(const WorkloadConfig& cfg)
      : warehouses_(cfg.warehouses > 0 ? cfg.warehouses
                                       : static_cast<int64_t>(scaled_count(kBaseWarehouses,
                                                                           cfg.scale))),
        items_(static_cast<int64_t>(scaled_count(kBaseItems, cfg.scale))),
        customers_per_district_(
            static_cast<int64_t>(scaled_count(kBaseCustomersPerDistrict, cfg.scale))),
        orders_per_district_(
            static_cast<int64_t>(scaled_count(kBaseOrdersPerDistrict, cfg.scale))) {
    next_o_id_.assign(static_cast<size_t>(warehouses_ * kDistrictsPerWarehouse),
                      orders_per_district_ + 1);
    next_h_id_ = warehouses_ * kDistrictsPerWarehouse * customers_per_district_ + 1;
    build_domains();
  }

  const std::string& name() const override {
    static const std::string kName = "tpcc";
    return kName;
  }

  Schema make_schema() const override {
    Schema schema;
    schema.add_table({"warehouse", {"w_id"}});
    schema.add_table({"district", {"d_w_id", "d_id"}});
    schema.add_table({"item", {"i_id"}});
    schema.add_table({"stock", {"s_w_id", "s_i_id"}});
    schema.add_table({"customer", {"c_w_id", "c_d_id", "c_id"}});
    schema.add_table({"orders", {"o_w_id", "o_d_id", "o_id"}});
    schema.add_table({"new_order", {"no_w_id", "no_d_id", "no_o_id"}});
    schema.add_table({"order_line", {"ol_w_id", "ol_d_id", "ol_o_id", "ol_number"}});
    schema.add_table({"history", {"h_id"}});
    return schema;
  }

  void populate(Database& db) override {
    const size_t warehouse_id = db.schema().table_id("warehouse");
    const size_t district_id = db.schema().table_id("district");
    const size_t item_id = db.schema().table_id("item");
    const size_t stock_id = db.schema().table_id("stock");
    const size_t customer_id = db.schema().table_id("customer");
    const size_t orders_id = db.schema().table_id("orders");
    const size_t new_order_id = db.schema().table_id("new_order");
    const size_t order_line_id = db.schema().table_id("order_line");
    const size_t history_id = db.schema().table_id("history");

    for (int64_t i = 1; i <= items_; ++i) {
      db.seed_row(item_id, RowKey::of(i), {{"i_price", Value{1 + (i * 7) % 100}}});
    }
    int64_t h_id = 0;
    for (int64_t w = 1; w <= warehouses_; ++w) {
      db.seed_row(warehouse_id, RowKey::of(w), {{"w_ytd", Value{int64_t{0}}}});
      for (int64_t i = 1; i <= items_; ++i) {
        db.seed_row(stock_id, RowKey::of(w, i),
                    {{"s_quantity", Value{10 + (w * 13 + i) % 91}}});
      }
      for (int64_t d = 1; d <= kDistrictsPerWarehouse; ++d) {
        db.seed_row(district_id, RowKey::of(w, d),
                    {{"d_ytd", Value{int64_t{0}}},
                     {"d_next_o_id", Value{orders_per_district_ + 1}}});
        for (int64_t c = 1; c <= customers_per_district_; ++c) {
          db.seed_row(customer_id, RowKey::of(w, d, c), {{"c_balance", Value{int64_t{0}}}});
          db.seed_row(history_id, RowKey::of(++h_id),
                      {{"h_amount", Value{1 + (h_id % kMaxPaymentAmount)}}});
        }
        for (int64_t o = 1; o <= orders_per_district_; ++o) {
          const int64_t c = 1 + (o * 17) % customers_per_district_;
          db.seed_row(orders_id, RowKey::of(w, d, o), {{"o_c_id", Value{c}}});
          db.seed_row(new_order_id, RowKey::of(w, d, o), {});
          for (int64_t l = 1; l <= kLinesPerSeededOrder; ++l) {
            const int64_t item = 1 + (o * 31 + l * 11 + d) % items_;
            db.seed_row(order_line_id, RowKey::of(w, d, o, l),
                        {{"ol_i_id", Value{item}},
                         {"ol_quantity", Value{int64_t{5}}},
                         {"ol_amount", Value{1 + (item * 3) % 100}}});
          }
        }
      }
    }
  }

  std::unique_ptr<Transaction> generate(std::mt19937_64& rng, uint64_t txn_id,
                                        double zipf_theta) override {
    const int64_t w = zipf_theta > 0.0
                          ? zipf_for(zipf_theta, static_cast<size_t>(warehouses_)).draw(rng)
                          : static_cast<int64_t>(rng() % warehouses_) + 1;
    const int64_t d = static_cast<int64_t>(rng() % kDistrictsPerWarehouse) + 1;
    const int64_t c = static_cast<int64_t>(rng() % customers_per_district_) + 1;

    auto txn = std::make_unique<Transaction>();
    txn->txn_id = txn_id;
    txn->partition_key = w;
    if (rng() % 100 < 50) {
      txn->txn_type = kNewOrder;
      build_new_order(*txn, rng, w, d, c);
    } else {
      txn->txn_type = kPayment;
      build_payment(*txn, rng, w, d, c);
    }
    return txn;
  }

  const DomainMap& domains() const override { return domains_; }
  size_t txn_type_count() const override { return 2; }
  std::string txn_type_name(int32_t type) const override {
    switch (type) {
      case kNewOrder: return "NewOrder";
      case kPayment: return "Payment";
      default: return "unknown";
    }
  }

  int64_t warehouses() const { return warehouses_; }

 private:
  static constexpr int32_t kNewOrder = 0;
  static constexpr int32_t kPayment = 1;

  void build_new_order(Transaction& txn, std::mt19937_64& rng, int64_t w, int64_t d, int64_t c) {
    const int64_t lines = 5 + static_cast<int64_t>(rng() % 11);  // 5..15
    const int64_t quantity = 1 + static_cast<int64_t>(rng() % kMaxQuantity);
    const size_t slot = static_cast<size_t>((w - 1) * kDistrictsPerWarehouse + (d - 1));
    const int64_t o = next_o_id_[slot]++;
    txn.params = {static_cast<int32_t>(w), static_cast<int32_t>(d), static_cast<int32_t>(c),
                  static_cast<int32_t>(quantity), static_cast<int32_t>(lines)};

    auto& stmts = txn.statements;
    stmts.push_back({StatementKind::kSelect, "warehouse", {eq("w_id", w)}, {}, {}});
    stmts.push_back({StatementKind::kSelect,
                     "customer",
                     {eq("c_w_id", w), eq("c_d_id", d), eq("c_id", c)},
                     {},
                     {}});
    stmts.push_back({StatementKind::kUpdate,
                     "district",
                     {eq("d_w_id", w), eq("d_id", d)},
                     {put("d_next_o_id", 1, WriteExpr::kAdd, /*labeled=*/false)},
                     {}});
    // Insert columns of brand-new rows (order ids and the key copies around
    // them) never collide with concurrent work, so they carry no conflict
    // signal and stay unlabeled; the same columns on the read/update
    // statements above keep the warehouse and district signal alive.
    stmts.push_back({StatementKind::kInsert,
                     "orders",
                     {},
                     {put("o_w_id", w, WriteExpr::kSet, /*labeled=*/false),
                      put("o_d_id", d, WriteExpr::kSet, /*labeled=*/false),
                      put("o_id", o, WriteExpr::kSet, /*labeled=*/false),
                      put("o_c_id", c, WriteExpr::kSet, /*labeled=*/false)},
                     {}});
    stmts.push_back({StatementKind::kInsert,
                     "new_order",
                     {},
                     {put("no_w_id", w, WriteExpr::kSet, /*labeled=*/false),
                      put("no_d_id", d, WriteExpr::kSet, /*labeled=*/false),
                      put("no_o_id", o, WriteExpr::kSet, /*labeled=*/false)},
                     {}});
    for (int64_t l = 1; l <= lines; ++l) {
      const int64_t item = static_cast<int64_t>(rng() % items_) + 1;
      const int64_t ol_quantity = 1 + static_cast<int64_t>(rng() % 10);
      // Item rows are never written, so an item lookup cannot conflict with
      // anything; the stock predicates below keep the item-id signal alive.
      stmts.push_back(
          {StatementKind::kSelect, "item", {eq("i_id", item, /*labeled=*/false)}, {}, {}});
      stmts.push_back({StatementKind::kUpdate,
                       "stock",
                       {eq("s_i_id", item), eq("s_w_id", w)},
                       {put("s_quantity", quantity)},
                       {}});
      stmts.push_back({StatementKind::kInsert,
                       "order_line",
                       {},
                       {put("ol_w_id", w, WriteExpr::kSet, /*labeled=*/false),
                        put("ol_d_id", d, WriteExpr::kSet, /*labeled=*/false),
                        put("ol_o_id", o, WriteExpr::kSet, /*labeled=*/false),
                        put("ol_number", l, WriteExpr::kSet, /*labeled=*/false),
                        put("ol_i_id", item, WriteExpr::kSet, /*labeled=*/false),
                        put("ol_quantity", ol_quantity, WriteExpr::kSet, /*labeled=*/false),
                        put("ol_amount", 1 + (item * 3) % 100, WriteExpr::kSet,
                            /*labeled=*/false)},
                       {}});
    }
  }

  void build_payment(Transaction& txn, std::mt19937_64& rng, int64_t w, int64_t d, int64_t c) {
    const int64_t amount = 1 + static_cast<int64_t>(rng() % kMaxPaymentAmount);
    const int64_t h = next_h_id_++;
    txn.params = {static_cast<int32_t>(w), static_cast<int32_t>(d), static_cast<int32_t>(c),
                  static_cast<int32_t>(amount)};

    auto& stmts = txn.statements;
    stmts.push_back({StatementKind::kUpdate,
                     "warehouse",
                     {eq("w_id", w)},
                     {put("w_ytd", amount, WriteExpr::kAdd)},
                     {}});
    stmts.push_back({StatementKind::kUpdate,
                     "district",
                     {eq("d_w_id", w), eq("d_id", d)},
                     {put("d_ytd", amount, WriteExpr::kAdd)},
                     {}});
    stmts.push_back({StatementKind::kUpdate,
                     "customer",
                     {eq("c_w_id", w), eq("c_d_id", d), eq("c_id", c)},
                     {put("c_balance", amount, WriteExpr::kAdd)},
                     {}});
    // Fresh history rows: all columns unlabeled for the same reason as the
    // order-side inserts.
    stmts.push_back({StatementKind::kInsert,
                     "history",
                     {},
                     {put("h_id", h, WriteExpr::kSet, /*labeled=*/false),
                      put("h_w_id", w, WriteExpr::kSet, /*labeled=*/false),
                      put("h_d_id", d, WriteExpr::kSet, /*labeled=*/false),
                      put("h_c_id", c, WriteExpr::kSet, /*labeled=*/false),
                      put("h_amount", amount, WriteExpr::kSet, /*labeled=*/false)},
                     {}});
  }

  void build_domains() {
    for (const char* attr :
         {"w_id", "d_w_id", "c_w_id", "s_w_id", "o_w_id", "ol_w_id", "no_w_id", "h_w_id"}) {
      domains_.add(attr, "w_id");
    }
    for (const char* attr : {"d_id", "c_d_id", "o_d_id", "ol_d_id", "no_d_id", "h_d_id"}) {
      domains_.add(attr, "d_id");
    }
    for (const char* attr : {"c_id", "o_c_id", "h_c_id"}) domains_.add(attr, "c_id");
    for (const char* attr : {"i_id", "s_i_id", "ol_i_id"}) domains_.add(attr, "i_id");
    for (const char* attr : {"o_id", "ol_o_id", "no_o_id"}) domains_.add(attr, "o_id");
    for (const char* attr : {"w_ytd", "d_ytd", "c_balance", "h_amount"}) {
      domains_.add(attr, "amount");
    }
    for (const char* attr : {"s_quantity", "d_next_o_id", "ol_number", "ol_quantity",
                             "ol_amount", "h_id", "i_price"}) {
      domains_.add_identity(attr);
    }
  }

  const int64_t warehouses_;
  const int64_t items_;
  const int64_t customers_per_district_;
  const int64_t orders_per_district_;
  std::vector<int64_t> next_o_id_;  // one slot per (warehouse, district)
  int64_t next_h_id_ = 1;
  DomainMap domains_;
};

}  // namespace

std::unique_ptr<Workload> make_tpcc_workload(const WorkloadConfig& cfg) {
  return std::make_unique<TpccWorkload>(cfg);
}

}  // namespace txnlab
