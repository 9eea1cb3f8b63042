#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "txnlab/row_store.hpp"
#include "txnlab/statement.hpp"

namespace txnlab {

// Outcome of one execution attempt. The three kAbort* statuses are retryable;
// kFailedDuplicateKey is a permanent failure (the transaction is not retried
// and is excluded from abort-rate accounting).
enum class AttemptStatus : uint8_t {
  kCommitted,
  kAbortReadValidation,  // optimistic validation found a stale read
  kAbortWriteConflict,   // optimistic validation failed on a key we also write
  kAbortLockConflict,    // wait-die decided the requester must die
  kFailedDuplicateKey,   // INSERT hit an existing committed row
};

constexpr bool is_retryable_abort(AttemptStatus s) {
  return s == AttemptStatus::kAbortReadValidation ||
         s == AttemptStatus::kAbortWriteConflict || s == AttemptStatus::kAbortLockConflict;
}

struct AttemptResult {
  AttemptStatus status = AttemptStatus::kCommitted;
  uint64_t commit_seq = 0;  // nonzero only for kCommitted
};

// A read result handed to the interpreter: committed state overlaid with the
// transaction's own buffered writes.
struct RowView {
  bool found = false;
  Columns cols;

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
};

// Per-attempt execution context. Implementations buffer writes locally and
// make them visible atomically at commit().
class TxnCtx {
 public:
  enum class OpStatus : uint8_t {
    kOk,
    kConflict,   // lock acquisition died (wait-die); attempt must abort
    kDuplicate,  // insert target already exists
  };

  virtual ~TxnCtx() = default;

  virtual OpStatus read(int table, const RowKey& key, RowView& out) = 0;
  virtual OpStatus update(int table, const RowKey& key, Columns changes) = 0;
  virtual OpStatus insert(int table, const RowKey& key, Columns cols) = 0;
  virtual OpStatus remove(int table, const RowKey& key) = 0;

  virtual AttemptResult commit() = 0;
  virtual void rollback() = 0;
};

// Optimistic context: reads record the first-seen row version; writes are
// buffered. commit() latches the write set in global (table, key) order,
// validates the read set against current versions, checks insert targets for
// committed duplicates, and only then installs.
class OccCtx final : public TxnCtx {
 public:
  explicit OccCtx(Database& db) : db_(db) {}

  OpStatus read(int table, const RowKey& key, RowView& out) override;
  OpStatus update(int table, const RowKey& key, Columns changes) override;
  OpStatus insert(int table, const RowKey& key, Columns cols) override;
  OpStatus remove(int table, const RowKey& key) override;
  AttemptResult commit() override;
  void rollback() override {}

 private:
  enum class WriteKind : uint8_t { kUpdate, kInsert, kDelete };
  struct WriteOp {
    WriteKind kind;
    Columns cols;
    // Insert that overwrote this transaction's own buffered delete: the
    // committed row may legitimately exist, so skip the duplicate-key check.
    bool replaces_delete = false;
  };
  using Key = std::pair<int, RowKey>;

  Database& db_;
  std::map<Key, uint64_t> read_set_;   // key -> first-read version
  std::map<Key, WriteOp> write_set_;   // ordered: latch acquisition is deadlock-free
};

// Strict two-phase locking context with wait-die deadlock avoidance. All
// locks (shared for reads, exclusive for writes) are held until commit or
// rollback; writes are buffered and installed under the held exclusive locks.
class TwoPlCtx final : public TxnCtx {
 public:
  // stamp doubles as the lock-owner id and the wait-die age (smaller = older);
  // it must be unique per attempt. no_wait turns every lock conflict into an
  // immediate die (sensitivity-run variant).
  TwoPlCtx(Database& db, uint64_t stamp, bool no_wait = false)
      : db_(db), stamp_(stamp), no_wait_(no_wait) {}
  ~TwoPlCtx() override { release_all(); }

  OpStatus read(int table, const RowKey& key, RowView& out) override;
  OpStatus update(int table, const RowKey& key, Columns changes) override;
  OpStatus insert(int table, const RowKey& key, Columns cols) override;
  OpStatus remove(int table, const RowKey& key) override;
  AttemptResult commit() override;
  void rollback() override { release_all(); }

 private:
  enum class WriteKind : uint8_t { kUpdate, kInsert, kDelete };
  struct WriteOp {
    WriteKind kind;
    Columns cols;
  };
  using Key = std::pair<int, RowKey>;

  // Acquires the row lock in the requested mode, upgrading a held shared
  // lock when possible. Returns false when wait-die says the requester dies.
  bool acquire(Row& row, bool exclusive);
  void release_all();

  Database& db_;
  uint64_t stamp_;
  bool no_wait_;
  std::map<Key, std::pair<Row*, bool>> held_;  // row + exclusive?
  std::map<Key, WriteOp> write_set_;
};

// Executes the statements against the context. Returns nullopt when every
// statement ran clean (the caller should then commit), or an early failure
// status (lock-conflict abort or duplicate-key failure).
std::optional<AttemptStatus> run_statements(TxnCtx& ctx, const std::vector<Statement>& statements,
                                            const Schema& schema, bool coop_yield);

// Runs one full attempt (execute + commit) under the database's protocol.
// stamp must be unique per attempt; it feeds the wait-die priority. no_wait
// applies only under two-phase locking.
AttemptResult run_transaction(Database& db, const std::vector<Statement>& statements,
                              uint64_t stamp, bool coop_yield, bool no_wait = false);

}  // namespace txnlab
