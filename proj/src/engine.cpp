#include "txnlab/engine.hpp"

#include <array>
#include <chrono>

namespace txnlab {

Engine::Engine(Database& db, Metrics& metrics, const Clock& clock, EngineConfig cfg)
    : db_(db), metrics_(metrics), clock_(clock), cfg_(cfg), queues_(cfg.worker_count) {}

Engine::~Engine() {
  if (!workers_.empty()) stop(/*drain=*/false);
}

void Engine::start() {
  running_.store(true, std::memory_order_release);
  drain_.store(true, std::memory_order_release);
  last_progress_ns_.store(clock_.now_ns(), std::memory_order_relaxed);
  workers_.reserve(cfg_.worker_count);
  for (size_t w = 0; w < cfg_.worker_count; ++w) {
    workers_.emplace_back([this, w] { worker_loop(w); });
  }
}

void Engine::stop(bool drain) {
  drain_.store(drain, std::memory_order_release);
  running_.store(false, std::memory_order_release);
  wake_cv_.notify_all();
  for (std::thread& t : workers_) t.join();
  workers_.clear();
}

void Engine::enqueue(std::unique_ptr<Transaction> txn, uint32_t queue) {
  txn->queue = queue;
  {
    std::lock_guard lk(queues_[queue].mu);
    queues_[queue].items.push_back(std::move(txn));
  }
  queued_.fetch_add(1, std::memory_order_release);
  wake_cv_.notify_one();
}

size_t Engine::queue_depth(uint32_t queue) const {
  std::lock_guard lk(queues_[queue].mu);
  return queues_[queue].items.size();
}

std::unique_ptr<Transaction> Engine::try_pop(uint32_t queue) {
  WorkQueue& wq = queues_[queue];
  std::lock_guard lk(wq.mu);
  if (wq.items.empty()) return nullptr;
  std::unique_ptr<Transaction> txn = std::move(wq.items.front());
  wq.items.pop_front();
  queued_.fetch_sub(1, std::memory_order_acq_rel);
  return txn;
}

std::unique_ptr<Transaction> Engine::next_work(size_t worker, bool& stolen,
                                               std::mt19937_64& rng) {
  if (auto txn = try_pop(static_cast<uint32_t>(worker))) {
    stolen = false;
    return txn;
  }
  // Steal the head of a uniformly random non-empty victim queue. A lost race
  // (victim drained between the snapshot and the pop) re-rolls among the
  // remaining candidates.
  for (;;) {
    std::array<uint32_t, 64> candidates{};
    size_t n = 0;
    for (uint32_t q = 0; q < queues_.size() && n < candidates.size(); ++q) {
      if (q == worker) continue;
      if (queue_depth(q) > 0) candidates[n++] = q;
    }
    if (n == 0) return nullptr;
    const uint32_t victim = candidates[rng() % n];
    if (auto txn = try_pop(victim)) {
      stolen = true;
      return txn;
    }
  }
}

void Engine::worker_loop(size_t worker) {
  std::mt19937_64 steal_rng(cfg_.steal_seed + 0x9e3779b97f4a7c15ull * (worker + 1));
  for (;;) {
    bool stolen = false;
    if (std::unique_ptr<Transaction> txn = next_work(worker, stolen, steal_rng)) {
      execute_to_retirement(*txn, worker, stolen);
      continue;
    }
    const bool running = running_.load(std::memory_order_acquire);
    if (!running &&
        (!drain_.load(std::memory_order_acquire) || queued_.load(std::memory_order_acquire) == 0)) {
      break;
    }
    std::unique_lock lk(wake_mu_);
    if (queued_.load(std::memory_order_acquire) != 0 || !running_.load(std::memory_order_acquire)) {
      continue;
    }
    idle_.fetch_add(1, std::memory_order_release);
    wake_cv_.wait_for(lk, std::chrono::milliseconds(1));
    idle_.fetch_sub(1, std::memory_order_release);
  }
}

void Engine::run_inline_until_empty() {
  for (;;) {
    bool any = false;
    for (uint32_t q = 0; q < queues_.size(); ++q) {
      while (std::unique_ptr<Transaction> txn = try_pop(q)) {
        any = true;
        execute_to_retirement(*txn, q, /*stolen=*/false);
      }
    }
    if (!any) return;
  }
}

void Engine::execute_to_retirement(Transaction& txn, size_t worker, bool stolen) {
  int attempt = 0;
  AttemptResult res;
  for (;;) {
    ++attempt;
    attempts_.fetch_add(1, std::memory_order_relaxed);
    if (cfg_.virtual_clock) cfg_.virtual_clock->advance_ns(cfg_.virtual_step_ns);
    if (hooks_.force_abort && hooks_.force_abort(txn, attempt)) {
      res = {AttemptStatus::kAbortWriteConflict, 0};
    } else {
      const uint64_t stamp = stamp_counter_.fetch_add(1, std::memory_order_relaxed) + 1;
      res = run_transaction(db_, txn.statements, stamp, cfg_.coop_yield, cfg_.no_wait);
    }
    txn.attempts = attempt;
    const uint64_t now = clock_.now_ns();
    if (hooks_.on_attempt) hooks_.on_attempt(txn, res.status);
    if (res.status == AttemptStatus::kCommitted) {
      metrics_.record_commit(worker, now - txn.arrival_ns, stolen, txn.txn_type, now);
      break;
    }
    if (!is_retryable_abort(res.status)) {
      metrics_.record_failed_no_retry(stolen);
      break;
    }
    metrics_.record_abort(res.status, txn.txn_type, now);
  }
  last_progress_ns_.store(clock_.now_ns(), std::memory_order_relaxed);
  if (hooks_.on_retire) {
    TxnOutcome out;
    out.final_status = res.status;
    out.retries_used = attempt - 1;
    out.worker = worker;
    out.stolen = stolen;
    out.commit_seq = res.commit_seq;
    hooks_.on_retire(txn, out);
  }
}

}  // namespace txnlab
