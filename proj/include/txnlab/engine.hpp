#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

#include "txnlab/clock.hpp"
#include "txnlab/metrics.hpp"
#include "txnlab/protocol.hpp"
#include "txnlab/row_store.hpp"
#include "txnlab/statement.hpp"

namespace txnlab {

// Liveness bound: an idle worker must notice queued work within one quantum.
// Workers actually poll far more often (1 ms waits); the slack absorbs OS
// preemption on oversubscribed hosts.
inline constexpr uint64_t kSchedulingQuantumNs = 25'000'000;

struct EngineConfig {
  size_t worker_count = 4;
  bool coop_yield = true;   // yield between statements (single-core hosts)
  bool no_wait = false;     // 2PL: die on any lock conflict instead of wait-die
  uint64_t steal_seed = 0x517ea1;
  // When set, the engine advances this clock by virtual_step_ns before every
  // attempt, making timing-derived output reproducible (single-threaded runs).
  VirtualClock* virtual_clock = nullptr;
  uint64_t virtual_step_ns = 1'000;
};

// Final fate of one transaction after all its retries.
struct TxnOutcome {
  AttemptStatus final_status = AttemptStatus::kCommitted;
  int retries_used = 0;  // attempts - 1
  size_t worker = 0;     // executing worker (== queue unless stolen)
  bool stolen = false;
  uint64_t commit_seq = 0;
};

// Observation points for the harness (History feed) and for tests.
struct EngineHooks {
  // Called after every attempt with its outcome. May cache refs on the txn.
  std::function<void(Transaction&, AttemptStatus)> on_attempt;
  // Forced-abort injection, consulted before executing an attempt; returning
  // true skips execution and counts a write-conflict abort.
  std::function<bool(const Transaction&, int attempt)> force_abort;
  // Called once per retired transaction.
  std::function<void(const Transaction&, const TxnOutcome&)> on_retire;
};

// N worker threads draining N FIFO run queues. An idle worker steals the head
// of a uniformly random non-empty queue; aborted transactions are retried
// immediately on the executing worker until they commit or fail permanently.
class Engine {
 public:
  Engine(Database& db, Metrics& metrics, const Clock& clock, EngineConfig cfg);
  ~Engine();

  // Must be called before start().
  void set_hooks(EngineHooks hooks) { hooks_ = std::move(hooks); }

  void start();
  // Joins the workers; when drain is true they first empty every queue,
  // otherwise remaining queued transactions are abandoned uncounted.
  void stop(bool drain);

  void enqueue(std::unique_ptr<Transaction> txn, uint32_t queue);

  // Drains every queue on the calling thread (no workers); used by the
  // deterministic runner.
  void run_inline_until_empty();

  size_t queue_count() const { return queues_.size(); }
  size_t queue_depth(uint32_t queue) const;
  size_t total_queued() const { return queued_.load(std::memory_order_acquire); }
  size_t idle_workers() const { return idle_.load(std::memory_order_acquire); }
  uint64_t attempts() const { return attempts_.load(std::memory_order_relaxed); }
  uint64_t last_progress_ns() const { return last_progress_ns_.load(std::memory_order_relaxed); }

 private:
  struct WorkQueue {
    mutable std::mutex mu;
    std::deque<std::unique_ptr<Transaction>> items;
  };

  std::unique_ptr<Transaction> try_pop(uint32_t queue);
  std::unique_ptr<Transaction> next_work(size_t worker, bool& stolen, std::mt19937_64& rng);
  void worker_loop(size_t worker);
  void execute_to_retirement(Transaction& txn, size_t worker, bool stolen);

  Database& db_;
  Metrics& metrics_;
  const Clock& clock_;
  EngineConfig cfg_;
  EngineHooks hooks_;
  std::vector<WorkQueue> queues_;
  std::vector<std::thread> workers_;
  std::mutex wake_mu_;
  std::condition_variable wake_cv_;
  std::atomic<size_t> queued_{0};
  std::atomic<size_t> idle_{0};
  std::atomic<bool> running_{false};
  std::atomic<bool> drain_{true};
  std::atomic<uint64_t> attempts_{0};
  std::atomic<uint64_t> stamp_counter_{0};
  std::atomic<uint64_t> last_progress_ns_{0};
};

}  // namespace txnlab
