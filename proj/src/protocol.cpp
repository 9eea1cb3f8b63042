#include "txnlab/protocol.hpp"

#include <algorithm>
#include <thread>

namespace txnlab {

namespace {

// Spins until the row's latch bit is free and claims it. Returns the version
// observed at acquisition. Latch holds are short straight-line sections
// (copy or install), so yielding in the loop is enough on any core count.
uint64_t latch_acquire(Row& row) {
  for (;;) {
    uint64_t w = row.vlock.load(std::memory_order_relaxed);
    if ((w & 1) == 0 &&
        row.vlock.compare_exchange_weak(w, w | 1, std::memory_order_acquire,
                                        std::memory_order_relaxed)) {
      return w >> 1;
    }
    std::this_thread::yield();
  }
}

void latch_release(Row& row, uint64_t version) {
  row.vlock.store(version << 1, std::memory_order_release);
}

void set_column(Columns& cols, const std::string& name, Value v) {
  for (auto& [c, old] : cols) {
    if (c == name) {
      old = std::move(v);
      return;
    }
  }
  cols.emplace_back(name, std::move(v));
}

int64_t value_as_int(const Value& v) {
  if (!std::holds_alternative<int64_t>(v)) {
    throw ConfigError("arithmetic on a non-integer literal");
  }
  return std::get<int64_t>(v);
}

}  // namespace

// ---------------------------------------------------------------------------
// Optimistic context
// ---------------------------------------------------------------------------

TxnCtx::OpStatus OccCtx::read(int table, const RowKey& key, RowView& out) {
  const Key k{table, key};
  out.found = false;
  out.cols.clear();

  uint64_t version = 0;
  if (Row* row = db_.table(table).find(key)) {
    version = latch_acquire(*row);
    out.found = row->exists;
    if (out.found) out.cols = row->cols;
    latch_release(*row, version);
  }
  read_set_.try_emplace(k, version);  // the first-read version is validated

  if (auto wit = write_set_.find(k); wit != write_set_.end()) {
    switch (wit->second.kind) {
      case WriteKind::kInsert:
        out.found = true;
        out.cols = wit->second.cols;
        break;
      case WriteKind::kDelete:
        out.found = false;
        out.cols.clear();
        break;
      case WriteKind::kUpdate:
        if (out.found) {
          for (const auto& [c, v] : wit->second.cols) set_column(out.cols, c, v);
        }
        break;
    }
  }
  return OpStatus::kOk;
}

TxnCtx::OpStatus OccCtx::update(int table, const RowKey& key, Columns changes) {
  const Key k{table, key};
  auto it = write_set_.find(k);
  if (it == write_set_.end() || it->second.kind == WriteKind::kDelete) {
    write_set_[k] = WriteOp{WriteKind::kUpdate, std::move(changes)};
  } else {
    // kUpdate stays an update, kInsert stays an insert; merge column values.
    for (auto& [c, v] : changes) set_column(it->second.cols, c, std::move(v));
  }
  return OpStatus::kOk;
}

TxnCtx::OpStatus OccCtx::insert(int table, const RowKey& key, Columns cols) {
  const Key k{table, key};
  auto it = write_set_.find(k);
  if (it != write_set_.end() && it->second.kind != WriteKind::kDelete) {
    return OpStatus::kDuplicate;  // duplicate within the transaction itself
  }
  const bool replaces_delete = it != write_set_.end();
  write_set_[k] = WriteOp{WriteKind::kInsert, std::move(cols), replaces_delete};
  return OpStatus::kOk;
}

TxnCtx::OpStatus OccCtx::remove(int table, const RowKey& key) {
  write_set_[Key{table, key}] = WriteOp{WriteKind::kDelete, {}};
  return OpStatus::kOk;
}

AttemptResult OccCtx::commit() {
  // Phase 1: latch the write set in key order (deadlock-free by ordering) and
  // remember each row's version at latch time.
  std::vector<std::pair<Row*, uint64_t>> latched;
  latched.reserve(write_set_.size());
  for (const auto& [k, w] : write_set_) {
    Row* row = db_.table(k.first).find_or_create(k.second, /*with_lock=*/false);
    latched.emplace_back(row, latch_acquire(*row));
  }

  const auto release_all = [&] {
    for (auto& [row, ver] : latched) latch_release(*row, ver);
  };

  // Phase 2: validate every read against the current committed version. A row
  // latched by another committer counts as a conflict. Failures on keys we
  // also write classify as write conflicts, the rest as read-validation.
  for (const auto& [k, first_version] : read_set_) {
    if (auto wit = write_set_.find(k); wit != write_set_.end()) {
      const auto pos = static_cast<size_t>(std::distance(write_set_.begin(), wit));
      if (latched[pos].second != first_version) {
        release_all();
        return {AttemptStatus::kAbortWriteConflict, 0};
      }
      continue;
    }
    const Row* row = db_.table(k.first).find(k.second);
    if (!row) {
      if (first_version != 0) {
        release_all();
        return {AttemptStatus::kAbortReadValidation, 0};
      }
      continue;
    }
    const uint64_t w = row->vlock.load(std::memory_order_acquire);
    if ((w & 1) != 0 || (w >> 1) != first_version) {
      release_all();
      return {AttemptStatus::kAbortReadValidation, 0};
    }
  }

  // Phase 3: only after reads validated, check insert targets for committed
  // duplicates (a racing writer would have failed validation above, so a hit
  // here is a genuine pre-existing row).
  {
    size_t i = 0;
    for (const auto& [k, w] : write_set_) {
      if (w.kind == WriteKind::kInsert && !w.replaces_delete && latched[i].first->exists) {
        release_all();
        return {AttemptStatus::kFailedDuplicateKey, 0};
      }
      ++i;
    }
  }

  // Phase 4: install. The sequence number is taken while all write latches
  // are held, so per-row install order always matches sequence order.
  const uint64_t seq = db_.next_commit_seq();
  CommitLog* log = db_.commit_log();
  size_t i = 0;
  for (const auto& [k, w] : write_set_) {
    Row* row = latched[i].first;
    const uint64_t version = latched[i].second;
    switch (w.kind) {
      case WriteKind::kUpdate:
        if (row->exists) {
          for (const auto& [c, v] : w.cols) set_column(row->cols, c, v);
        }
        break;
      case WriteKind::kInsert:
        row->exists = true;
        row->cols = w.cols;
        break;
      case WriteKind::kDelete:
        row->exists = false;
        row->cols.clear();
        break;
    }
    if (log) log->append({seq, k.first, k.second, row->exists, row->cols});
    latch_release(*row, version + 1);
    ++i;
  }
  return {AttemptStatus::kCommitted, seq};
}

// ---------------------------------------------------------------------------
// Strict 2PL context (wait-die)
// ---------------------------------------------------------------------------

bool TwoPlCtx::acquire(Row& row, bool exclusive) {
  LockState& lock = *row.lock;
  std::unique_lock lk(lock.mu);
  for (;;) {
    bool conflict = false;
    bool must_die = false;
    const auto against = [&](uint64_t age) {
      conflict = true;
      // Wait only when strictly older than every conflicting holder.
      if (stamp_ >= age) must_die = true;
    };
    if (lock.x_owner != 0 && lock.x_owner != stamp_) against(lock.x_age);
    if (exclusive) {
      for (const auto& [owner, age] : lock.s_owners) {
        if (owner != stamp_) against(age);
      }
    }
    if (!conflict) break;
    if (must_die || no_wait_) return false;
    lock.cv.wait(lk);
  }

  if (exclusive) {
    if (lock.x_owner != stamp_) {
      // Upgrade: drop our shared entry (no other holders remain by now).
      std::erase_if(lock.s_owners, [&](const auto& o) { return o.first == stamp_; });
      lock.x_owner = stamp_;
      lock.x_age = stamp_;
    }
  } else if (lock.x_owner != stamp_) {
    const bool already =
        std::any_of(lock.s_owners.begin(), lock.s_owners.end(),
                    [&](const auto& o) { return o.first == stamp_; });
    if (!already) lock.s_owners.emplace_back(stamp_, stamp_);
  }
  return true;
}

void TwoPlCtx::release_all() {
  for (auto& [k, entry] : held_) {
    Row* row = entry.first;
    LockState& lock = *row->lock;
    {
      std::lock_guard lk(lock.mu);
      if (lock.x_owner == stamp_) lock.x_owner = 0;
      std::erase_if(lock.s_owners, [&](const auto& o) { return o.first == stamp_; });
    }
    lock.cv.notify_all();
  }
  held_.clear();
}

TxnCtx::OpStatus TwoPlCtx::read(int table, const RowKey& key, RowView& out) {
  const Key k{table, key};
  Row* row = db_.table(table).find_or_create(key, /*with_lock=*/true);
  auto it = held_.find(k);
  if (it == held_.end()) {
    if (!acquire(*row, /*exclusive=*/false)) return OpStatus::kConflict;
    held_.emplace(k, std::make_pair(row, false));
  }

  out.found = row->exists;  // stable: shared lock blocks installers
  out.cols = out.found ? row->cols : Columns{};

  if (auto wit = write_set_.find(k); wit != write_set_.end()) {
    switch (wit->second.kind) {
      case WriteKind::kInsert:
        out.found = true;
        out.cols = wit->second.cols;
        break;
      case WriteKind::kDelete:
        out.found = false;
        out.cols.clear();
        break;
      case WriteKind::kUpdate:
        if (out.found) {
          for (const auto& [c, v] : wit->second.cols) set_column(out.cols, c, v);
        }
        break;
    }
  }
  return OpStatus::kOk;
}

TxnCtx::OpStatus TwoPlCtx::update(int table, const RowKey& key, Columns changes) {
  const Key k{table, key};
  Row* row = db_.table(table).find_or_create(key, /*with_lock=*/true);
  auto it = held_.find(k);
  if (it == held_.end() || !it->second.second) {
    if (!acquire(*row, /*exclusive=*/true)) return OpStatus::kConflict;
    held_[k] = {row, true};
  }
  auto wit = write_set_.find(k);
  if (wit == write_set_.end() || wit->second.kind == WriteKind::kDelete) {
    write_set_[k] = WriteOp{WriteKind::kUpdate, std::move(changes)};
  } else {
    for (auto& [c, v] : changes) set_column(wit->second.cols, c, std::move(v));
  }
  return OpStatus::kOk;
}

TxnCtx::OpStatus TwoPlCtx::insert(int table, const RowKey& key, Columns cols) {
  const Key k{table, key};
  Row* row = db_.table(table).find_or_create(key, /*with_lock=*/true);
  auto it = held_.find(k);
  if (it == held_.end() || !it->second.second) {
    if (!acquire(*row, /*exclusive=*/true)) return OpStatus::kConflict;
    held_[k] = {row, true};
  }
  auto wit = write_set_.find(k);
  const bool overlay_deleted = wit != write_set_.end() && wit->second.kind == WriteKind::kDelete;
  const bool overlay_live = wit != write_set_.end() && !overlay_deleted;
  if (overlay_live || (row->exists && !overlay_deleted)) {
    return OpStatus::kDuplicate;  // exclusive lock held: committed state is final
  }
  write_set_[k] = WriteOp{WriteKind::kInsert, std::move(cols)};
  return OpStatus::kOk;
}

TxnCtx::OpStatus TwoPlCtx::remove(int table, const RowKey& key) {
  const Key k{table, key};
  Row* row = db_.table(table).find_or_create(key, /*with_lock=*/true);
  auto it = held_.find(k);
  if (it == held_.end() || !it->second.second) {
    if (!acquire(*row, /*exclusive=*/true)) return OpStatus::kConflict;
    held_[k] = {row, true};
  }
  write_set_[k] = WriteOp{WriteKind::kDelete, {}};
  return OpStatus::kOk;
}

AttemptResult TwoPlCtx::commit() {
  const uint64_t seq = db_.next_commit_seq();
  CommitLog* log = db_.commit_log();
  for (const auto& [k, w] : write_set_) {
    Row* row = held_.at(k).first;  // exclusive lock is held
    const uint64_t version = row->vlock.load(std::memory_order_relaxed) >> 1;
    switch (w.kind) {
      case WriteKind::kUpdate:
        if (row->exists) {
          for (const auto& [c, v] : w.cols) set_column(row->cols, c, v);
        }
        break;
      case WriteKind::kInsert:
        row->exists = true;
        row->cols = w.cols;
        break;
      case WriteKind::kDelete:
        row->exists = false;
        row->cols.clear();
        break;
    }
    if (log) log->append({seq, k.first, k.second, row->exists, row->cols});
    row->vlock.store((version + 1) << 1, std::memory_order_release);
  }
  release_all();
  return {AttemptStatus::kCommitted, seq};
}

// ---------------------------------------------------------------------------
// Statement interpreter
// ---------------------------------------------------------------------------

namespace {

// INSERTs pin their key through the VALUES list; everything else through the
// WHERE conjunction.
RowKey resolve_key(const TableDef& def, const Statement& stmt) {
  RowKey key;
  for (const auto& attr : def.key_attrs) {
    const Value* hit = nullptr;
    if (stmt.kind == StatementKind::kInsert) {
      for (const auto& cw : stmt.sets) {
        if (cw.attr == attr && cw.expr == WriteExpr::kSet) {
          hit = &cw.value;
          break;
        }
      }
    } else {
      for (const auto& p : stmt.where) {
        if (p.attr == attr) {
          hit = &p.value;
          break;
        }
      }
    }
    if (!hit || !std::holds_alternative<int64_t>(*hit)) {
      throw ConfigError("statement on '" + def.name + "' does not pin the primary key");
    }
    key.push(std::get<int64_t>(*hit));
  }
  return key;
}

bool passes_nonkey_predicates(const TableDef& def, const std::vector<Predicate>& where,
                              const RowView& row) {
  for (const auto& p : where) {
    const bool is_key =
        std::find(def.key_attrs.begin(), def.key_attrs.end(), p.attr) != def.key_attrs.end();
    if (is_key) continue;
    const Value* v = row.col(p.attr);
    if (!v || !(*v == p.value)) return false;
  }
  return true;
}

}  // namespace

std::optional<AttemptStatus> run_statements(TxnCtx& ctx, const std::vector<Statement>& statements,
                                            const Schema& schema, bool coop_yield) {
  int64_t captured_sum = 0;
  for (const auto& stmt : statements) {
    if (coop_yield) std::this_thread::yield();  // statement-granular interleaving
    const int table = schema.table_id(stmt.table);
    const TableDef& def = schema.def(table);
    const RowKey key = resolve_key(def, stmt);

    switch (stmt.kind) {
      case StatementKind::kSelect: {
        RowView view;
        if (ctx.read(table, key, view) == TxnCtx::OpStatus::kConflict) {
          return AttemptStatus::kAbortLockConflict;
        }
        if (view.found && passes_nonkey_predicates(def, stmt.where, view)) {
          for (const auto& cap : stmt.captures) captured_sum += view.col_int(cap);
        }
        break;
      }
      case StatementKind::kUpdate: {
        RowView view;
        if (ctx.read(table, key, view) == TxnCtx::OpStatus::kConflict) {
          return AttemptStatus::kAbortLockConflict;
        }
        if (!view.found || !passes_nonkey_predicates(def, stmt.where, view)) break;
        Columns changes;
        changes.reserve(stmt.sets.size());
        for (const auto& cw : stmt.sets) {
          switch (cw.expr) {
            case WriteExpr::kSet:
              changes.emplace_back(cw.attr, cw.value);
              break;
            case WriteExpr::kAdd:
              changes.emplace_back(cw.attr, view.col_int(cw.attr) + value_as_int(cw.value));
              break;
            case WriteExpr::kAddCaptured:
              changes.emplace_back(cw.attr, view.col_int(cw.attr) + captured_sum);
              break;
            case WriteExpr::kSubWithPenalty: {
              const int64_t amount = value_as_int(cw.value);
              const int64_t penalty = captured_sum < amount ? 1 : 0;
              changes.emplace_back(cw.attr, view.col_int(cw.attr) - amount - penalty);
              break;
            }
          }
        }
        if (ctx.update(table, key, std::move(changes)) == TxnCtx::OpStatus::kConflict) {
          return AttemptStatus::kAbortLockConflict;
        }
        break;
      }
      case StatementKind::kInsert: {
        Columns cols;
        cols.reserve(stmt.sets.size());
        for (const auto& cw : stmt.sets) cols.emplace_back(cw.attr, cw.value);
        switch (ctx.insert(table, key, std::move(cols))) {
          case TxnCtx::OpStatus::kConflict:
            return AttemptStatus::kAbortLockConflict;
          case TxnCtx::OpStatus::kDuplicate:
            return AttemptStatus::kFailedDuplicateKey;
          case TxnCtx::OpStatus::kOk:
            break;
        }
        break;
      }
      case StatementKind::kDelete: {
        RowView view;
        if (ctx.read(table, key, view) == TxnCtx::OpStatus::kConflict) {
          return AttemptStatus::kAbortLockConflict;
        }
        if (!view.found) break;
        if (ctx.remove(table, key) == TxnCtx::OpStatus::kConflict) {
          return AttemptStatus::kAbortLockConflict;
        }
        break;
      }
    }
  }
  return std::nullopt;
}

AttemptResult run_transaction(Database& db, const std::vector<Statement>& statements,
                              uint64_t stamp, bool coop_yield, bool no_wait) {
  if (db.protocol() == Protocol::kOcc) {
    OccCtx ctx(db);
    if (auto early = run_statements(ctx, statements, db.schema(), coop_yield)) {
      ctx.rollback();
      return {*early, 0};
    }
    return ctx.commit();
  }
  TwoPlCtx ctx(db, stamp, no_wait);
  if (auto early = run_statements(ctx, statements, db.schema(), coop_yield)) {
    ctx.rollback();
    return {*early, 0};
  }
  return ctx.commit();
}

}  // namespace txnlab
