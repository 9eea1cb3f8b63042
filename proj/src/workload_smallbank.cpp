#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "txnlab/workload.hpp"

namespace txnlab {
namespace {

constexpr int64_t kBaseAccounts = 10000;
constexpr int64_t kHotAccounts = 50;
constexpr int64_t kHotPercent = 90;
constexpr int64_t kMaxAmount = 10;

Predicate eq(std::string attr, int64_t value, bool labeled = true) {
  return Predicate{std::move(attr), Value{value}, labeled};
}

ColumnWrite put(std::string attr, int64_t value, WriteExpr expr = WriteExpr::kSet,
                bool labeled = true) {
  return ColumnWrite{std::move(attr), Value{value}, expr, labeled};
}

class SmallBankWorkload final : public Workload {
 public:
  explicit SmallBankWorkload(const WorkloadConfig& cfg)
      : accounts_(static_cast<int64_t>(scaled_count(kBaseAccounts, cfg.scale))) {
    domains_.add_identity("a_id");
    domains_.add("bal", "amount");
    domains_.add_identity("owner");
  }

  const std::string& name() const override {
    static const std::string kName = "smallbank";
    return kName;
  }

  Schema make_schema() const override {
    Schema schema;
    schema.add_table({"account", {"a_id"}});
    schema.add_table({"savings", {"a_id"}});
    schema.add_table({"checking", {"a_id"}});
    return schema;
  }

  void populate(Database& db) override {
    const size_t account_id = db.schema().table_id("account");
    const size_t savings_id = db.schema().table_id("savings");
    const size_t checking_id = db.schema().table_id("checking");
    for (int64_t a = 1; a <= accounts_; ++a) {
      db.seed_row(account_id, RowKey::of(a), {{"owner", Value{100000 + a}}});
      db.seed_row(savings_id, RowKey::of(a), {{"bal", Value{1000 + a % 50}}});
      db.seed_row(checking_id, RowKey::of(a), {{"bal", Value{1000 + a % 25}}});
    }
  }

  std::unique_ptr<Transaction> generate(std::mt19937_64& rng, uint64_t txn_id,
                                        double zipf_theta) override {
    auto txn = std::make_unique<Transaction>();
    txn->txn_id = txn_id;
    const int64_t x = draw_account(rng, zipf_theta);
    txn->partition_key = x;

    const uint64_t p = rng() % 100;
    if (p < 4) {
      txn->txn_type = kAmalgamate;
      int64_t y = draw_account(rng, zipf_theta);
      while (y == x && accounts_ > 1) y = draw_account(rng, zipf_theta);
      build_amalgamate(*txn, x, y);
    } else if (p < 28) {
      txn->txn_type = kBalance;
      build_balance(*txn, x);
    } else if (p < 52) {
      txn->txn_type = kDepositChecking;
      build_deposit_checking(*txn, x, 1 + static_cast<int64_t>(rng() % kMaxAmount));
    } else if (p < 76) {
      txn->txn_type = kTransactSavings;
      build_transact_savings(*txn, x, 1 + static_cast<int64_t>(rng() % kMaxAmount));
    } else {
      txn->txn_type = kWriteCheck;
      build_write_check(*txn, x, 1 + static_cast<int64_t>(rng() % kMaxAmount));
    }
    return txn;
  }

  const DomainMap& domains() const override { return domains_; }
  size_t txn_type_count() const override { return 5; }
  std::string txn_type_name(int32_t type) const override {
    switch (type) {
      case kAmalgamate: return "Amalgamate";
      case kBalance: return "Balance";
      case kDepositChecking: return "DepositChecking";
      case kTransactSavings: return "TransactSavings";
      case kWriteCheck: return "WriteCheck";
      default: return "unknown";
    }
  }

  int64_t accounts() const { return accounts_; }

 private:
  static constexpr int32_t kAmalgamate = 0;
  static constexpr int32_t kBalance = 1;
  static constexpr int32_t kDepositChecking = 2;
  static constexpr int32_t kTransactSavings = 3;
  static constexpr int32_t kWriteCheck = 4;

  int64_t draw_account(std::mt19937_64& rng, double zipf_theta) {
    if (zipf_theta > 0.0) {
      return zipf_for(zipf_theta, static_cast<size_t>(accounts_)).draw(rng);
    }
    const int64_t hot_span = std::min(kHotAccounts, accounts_);
    if (rng() % 100 < static_cast<uint64_t>(kHotPercent)) {
      return static_cast<int64_t>(rng() % hot_span) + 1;
    }
    return static_cast<int64_t>(rng() % accounts_) + 1;
  }

  void build_balance(Transaction& txn, int64_t x) {
    txn.params = {static_cast<int32_t>(x)};
    auto& stmts = txn.statements;
    stmts.push_back({StatementKind::kSelect, "account", {eq("a_id", x)}, {}, {}});
    stmts.push_back({StatementKind::kSelect, "savings", {eq("a_id", x)}, {}, {"bal"}});
    stmts.push_back({StatementKind::kSelect, "checking", {eq("a_id", x)}, {}, {"bal"}});
  }

  void build_deposit_checking(Transaction& txn, int64_t x, int64_t amount) {
    txn.params = {static_cast<int32_t>(x), static_cast<int32_t>(amount)};
    auto& stmts = txn.statements;
    stmts.push_back({StatementKind::kSelect, "account", {eq("a_id", x)}, {}, {}});
    stmts.push_back({StatementKind::kUpdate,
                     "checking",
                     {eq("a_id", x)},
                     {put("bal", amount, WriteExpr::kAdd)},
                     {}});
  }

  void build_transact_savings(Transaction& txn, int64_t x, int64_t amount) {
    txn.params = {static_cast<int32_t>(x), static_cast<int32_t>(amount)};
    auto& stmts = txn.statements;
    stmts.push_back({StatementKind::kSelect, "account", {eq("a_id", x)}, {}, {}});
    stmts.push_back({StatementKind::kUpdate,
                     "savings",
                     {eq("a_id", x)},
                     {put("bal", amount, WriteExpr::kAdd)},
                     {}});
  }

  void build_write_check(Transaction& txn, int64_t x, int64_t amount) {
    txn.params = {static_cast<int32_t>(x), static_cast<int32_t>(amount)};
    auto& stmts = txn.statements;
    stmts.push_back({StatementKind::kSelect, "account", {eq("a_id", x)}, {}, {}});
    stmts.push_back({StatementKind::kSelect, "savings", {eq("a_id", x)}, {}, {"bal"}});
    stmts.push_back({StatementKind::kSelect, "checking", {eq("a_id", x)}, {}, {"bal"}});
    stmts.push_back({StatementKind::kUpdate,
                     "checking",
                     {eq("a_id", x)},
                     {put("bal", amount, WriteExpr::kSubWithPenalty)},
                     {}});
  }

  void build_amalgamate(Transaction& txn, int64_t x, int64_t y) {
    txn.params = {static_cast<int32_t>(x), static_cast<int32_t>(y)};
    auto& stmts = txn.statements;
    stmts.push_back({StatementKind::kSelect, "account", {eq("a_id", x)}, {}, {}});
    stmts.push_back({StatementKind::kSelect, "savings", {eq("a_id", x)}, {}, {"bal"}});
    stmts.push_back({StatementKind::kSelect, "checking", {eq("a_id", x)}, {}, {"bal"}});
    stmts.push_back(
        {StatementKind::kUpdate, "savings", {eq("a_id", x)}, {put("bal", 0)}, {}});
    stmts.push_back(
        {StatementKind::kUpdate, "checking", {eq("a_id", x)}, {put("bal", 0)}, {}});
    stmts.push_back({StatementKind::kUpdate,
                     "checking",
                     {eq("a_id", y)},
                     {put("bal", 0, WriteExpr::kAddCaptured)},
                     {}});
  }

  const int64_t accounts_;
  DomainMap domains_;
};

}  // namespace

std::unique_ptr<Workload> make_smallbank_workload(const WorkloadConfig& cfg) {
  return std::make_unique<SmallBankWorkload>(cfg);
}

}  // namespace txnlab
