#pragma once

#include <array>
#include <atomic>
#include <compare>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "txnlab/statement.hpp"

namespace txnlab {

enum class Protocol : uint8_t { kOcc, kTwoPl };

// Primary key: up to four int64 parts, ordered lexicographically.
struct RowKey {
  std::array<int64_t, 4> parts{};
  uint8_t size = 0;

  template <typename... Parts>
  static RowKey of(Parts... vals) {
    static_assert(sizeof...(Parts) >= 1 && sizeof...(Parts) <= 4);
    RowKey k;
    (k.push(static_cast<int64_t>(vals)), ...);
    return k;
  }
  void push(int64_t v) { parts[size++] = v; }

  friend auto operator<=>(const RowKey& a, const RowKey& b) {
    for (uint8_t i = 0; i < a.size && i < b.size; ++i) {
      if (auto c = a.parts[i] <=> b.parts[i]; c != 0) return c;
    }
    return a.size <=> b.size;
  }
  friend bool operator==(const RowKey& a, const RowKey& b) = default;
};

// Shared/exclusive row lock with wait-die ordering (2PL mode only).
// Owners are attempt uids; ages are the wait-die priority stamps (smaller =
// older). A requester waits only when it is older than every conflicting
// holder; otherwise it must die (abort with a lock conflict).
struct LockState {
  std::mutex mu;
  std::condition_variable cv;
  uint64_t x_owner = 0;  // 0 = unheld
  uint64_t x_age = 0;
  std::vector<std::pair<uint64_t, uint64_t>> s_owners;  // (uid, age)
};

using Columns = std::vector<std::pair<std::string, Value>>;

struct Row {
  // Combined version + latch word: (version << 1) | locked. A single atomic
  // word makes the OCC validation check (not locked, version unchanged) one
  // load, which closes the check-then-read window. exists/cols are only
  // touched while the latch bit is held (OCC) or under the row lock (2PL).
  std::atomic<uint64_t> vlock{0};
  bool exists = false;  // false = tombstone (deleted or never inserted)
  Columns cols;
  std::unique_ptr<LockState> lock;

  uint64_t version() const { return vlock.load(std::memory_order_acquire) >> 1; }

  const Value* col(const std::string& name) const {
    for (const auto& [c, v] : cols) {
      if (c == name) return &v;
    }
    return nullptr;
  }
  int64_t col_int(const std::string& name) const {
    const Value* v = col(name);
    return v && std::holds_alternative<int64_t>(*v) ? std::get<int64_t>(*v) : 0;
  }
  void set_col(const std::string& name, Value v) {
    for (auto& [c, old] : cols) {
      if (c == name) {
        old = std::move(v);
        return;
      }
    }
    cols.emplace_back(name, std::move(v));
  }
};

struct TableDef {
  std::string name;
  std::vector<std::string> key_attrs;
};

class Schema {
 public:
  int add_table(TableDef def) {
    const int id = static_cast<int>(defs_.size());
    index_.emplace(def.name, id);
    defs_.push_back(std::move(def));
    return id;
  }
  int table_id(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ConfigError("unknown table '" + name + "'");
    return it->second;
  }
  const TableDef& def(int id) const { return defs_[static_cast<size_t>(id)]; }
  size_t table_count() const { return defs_.size(); }

 private:
  std::vector<TableDef> defs_;
  std::unordered_map<std::string, int> index_;
};

// Node-stable ordered row container; structural changes guarded by a shared
// mutex, row contents guarded by the per-row latch/lock.
class Table {
 public:
  Row* find(const RowKey& key) const {
    std::shared_lock lk(mu_);
    auto it = rows_.find(key);
    return it == rows_.end() ? nullptr : it->second.get();
  }

  // Returns the row for key, creating a tombstone (version 0, absent) if
  // needed. Lock state is allocated when the database runs under 2PL.
  Row* find_or_create(const RowKey& key, bool with_lock) {
    if (Row* r = find(key)) return r;
    std::unique_lock lk(mu_);
    auto [it, inserted] = rows_.try_emplace(key, nullptr);
    if (inserted) {
      it->second = std::make_unique<Row>();
      if (with_lock) it->second->lock = std::make_unique<LockState>();
    }
    return it->second.get();
  }

  size_t node_count() const {
    std::shared_lock lk(mu_);
    return rows_.size();
  }
  size_t count_existing() const {
    std::shared_lock lk(mu_);
    size_t n = 0;
    for (const auto& [k, r] : rows_) n += r->exists ? 1 : 0;
    return n;
  }

  template <typename Fn>
  void for_each(Fn&& fn) const {
    std::shared_lock lk(mu_);
    for (const auto& [k, r] : rows_) fn(k, *r);
  }

 private:
  mutable std::shared_mutex mu_;
  std::map<RowKey, std::unique_ptr<Row>> rows_;
};

// Optional per-commit installation log. Append order per row matches commit
// sequence order, so replaying records sorted by seq onto a fresh store must
// reproduce the final committed state.
struct CommitRecord {
  uint64_t seq = 0;
  int table = 0;
  RowKey key;
  bool exists = false;  // post-install presence
  Columns cols;         // post-install contents
};

class CommitLog {
 public:
  void append(CommitRecord rec) {
    std::lock_guard lk(mu_);
    records_.push_back(std::move(rec));
  }
  std::vector<CommitRecord> snapshot() const {
    std::lock_guard lk(mu_);
    return records_;
  }

 private:
  mutable std::mutex mu_;
  std::vector<CommitRecord> records_;
};

class Database {
 public:
  Database(Schema schema, Protocol protocol)
      : schema_(std::move(schema)), protocol_(protocol), tables_(schema_.table_count()) {}

  // Movable so factories can build, populate, and return one by value. Only
  // safe while no transactions are in flight: the commit counter transfer is
  // not atomic with concurrent increments.
  Database(Database&& other) noexcept
      : schema_(std::move(other.schema_)),
        protocol_(other.protocol_),
        tables_(std::move(other.tables_)),
        commit_seq_(other.commit_seq_.load(std::memory_order_relaxed)),
        commit_log_(other.commit_log_) {}
  Database& operator=(Database&&) = delete;

  const Schema& schema() const { return schema_; }
  Protocol protocol() const { return protocol_; }
  Table& table(int id) { return tables_[static_cast<size_t>(id)]; }
  const Table& table(int id) const { return tables_[static_cast<size_t>(id)]; }

  uint64_t next_commit_seq() { return commit_seq_.fetch_add(1, std::memory_order_relaxed) + 1; }

  // Commit logging is off by default; tests enable it to replay installs.
  void set_commit_log(CommitLog* log) { commit_log_ = log; }
  CommitLog* commit_log() const { return commit_log_; }

  // Populate-time direct insert (single-threaded, no protocol involvement).
  void seed_row(int table_id, const RowKey& key, Columns cols) {
    Row* r = table(table_id).find_or_create(key, protocol_ == Protocol::kTwoPl);
    r->cols = std::move(cols);
    r->exists = true;
    r->vlock.store(uint64_t{1} << 1, std::memory_order_release);
  }

 private:
  Schema schema_;
  Protocol protocol_;
  std::vector<Table> tables_;
  std::atomic<uint64_t> commit_seq_{0};
  CommitLog* commit_log_ = nullptr;
};

}  // namespace txnlab
