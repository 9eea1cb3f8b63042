#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "txnlab/engine.hpp"
#include "txnlab/history.hpp"
#include "txnlab/metrics.hpp"
#include "txnlab/policy.hpp"
#include "txnlab/queue_state.hpp"
#include "txnlab/workload.hpp"

namespace txnlab {

enum class ThrottleMode : uint8_t { kNone, kFixedRate, kResponseTime };

struct ThrottleConfig {
  ThrottleMode mode = ThrottleMode::kNone;
  double rate_tps = 0.0;      // kFixedRate: admissions per second
  double target_rt_ms = 0.0;  // kResponseTime: rolling mean target

  // "none" | "rate:<tps>" | "rt:<ms>"
  static ThrottleConfig parse(const std::string& text);
};

// Admits at a fixed average rate with a one-token burst allowance.
class TokenBucket {
 public:
  TokenBucket(double rate_per_sec, uint64_t start_ns);

  void set_rate(double rate_per_sec) { rate_ = rate_per_sec; }
  double rate() const { return rate_; }
  bool try_take(uint64_t now_ns);

 private:
  double rate_;
  double tokens_ = 0.0;
  uint64_t last_ns_;
};

// Proportional controller: scales the admission rate toward the response-time
// target each update. While the observed mean stays above target the rate
// decreases monotonically.
class RateController {
 public:
  RateController(double target_ms, double initial_tps, double min_tps = 1.0,
                 double max_tps = 1e7);

  double rate() const { return rate_; }
  double target_ms() const { return target_ms_; }
  // Feed the rolling mean response time observed since the previous update;
  // returns the new admission rate. Non-positive observations (no commits in
  // the window) leave the rate unchanged.
  double update(double observed_mean_rt_ms);

 private:
  double target_ms_;
  double rate_;
  double min_tps_;
  double max_tps_;
};

struct SkewPhase {
  double theta = 0.0;  // 0 = uniform
  double seconds = 0.0;
};

// "uniform:20,zipf0.3:20,uniform:20" -> three phases.
std::vector<SkewPhase> parse_skew_schedule(const std::string& text);

// "r=0.5,t=5,window=5[,cap=100000][,hot=75]" (keys optional, any order).
EvictConfig parse_evict(const std::string& text);

struct ExperimentConfig {
  std::string benchmark = "tpcc";
  std::string policy = "count/max/canonical/single";
  Protocol protocol = Protocol::kOcc;
  size_t worker_threads = 4;  // one extra thread is always the dispatcher
  int warehouses = 0;         // tpcc: 0 = derive from scale
  double scale = 0.1;
  double phase1_seconds = 2.0;
  double phase2_seconds = 10.0;
  size_t repetitions = 10;
  ThrottleConfig throttle;
  std::vector<SkewPhase> skew;  // continuous mode only; empty = uniform
  bool continuous = false;
  double history_regen_seconds = 60.0;
  uint64_t seed = 1;
  std::string out_path;  // empty = don't write a file
  EvictConfig evict;
  bool eviction_enabled = true;  // continuous-mode housekeeping
  bool stability_gate = true;    // evict only while the abort rate is steady
  size_t max_outstanding = 4096;
  bool coop_yield = true;
  bool no_wait = false;
  bool commit_log = false;      // attach a replay log to every database
  bool deterministic = false;   // virtual clock + inline execution
  double det_arrival_tps = 2000.0;  // deterministic-mode admission rate
};

// One phase's outcome plus the reconciliation counters.
struct PhaseStats {
  MetricsSnapshot metrics;
  uint64_t attempts = 0;
  uint64_t admitted = 0;
  double elapsed_secs = 0.0;
};

// Everything a run touched, kept alive so callers can inspect the final
// database state, replay log, or scheduler state after the run.
struct PhaseContext {
  std::unique_ptr<Workload> workload;
  std::unique_ptr<Database> db;
  std::unique_ptr<CommitLog> log;
  std::unique_ptr<State> state;
  std::unique_ptr<Metrics> metrics;
  std::unique_ptr<History> history;  // owned in continuous mode only
  PhaseStats stats;
  std::vector<uint32_t> state_entries_per_sec;  // continuous mode
  size_t state_entries_peak = 0;
  uint64_t evict_passes = 0;
  uint64_t history_regens = 0;
};

// Phase I: fresh database, random queue assignment, populates `history` from
// per-attempt outcomes (reference shape taken from cfg.policy), then freezes
// it. The scheduler state is not populated.
PhaseContext run_phase1(const ExperimentConfig& cfg, uint64_t rep_seed, History& history);

// Phase II: fresh database, measured run under cfg.policy with `history`
// read-only and live scheduler state.
PhaseContext run_phase2(const ExperimentConfig& cfg, uint64_t rep_seed, const History& history);

// Single long run: history stays writable and is periodically regenerated,
// scheduler-state eviction runs under the stability gate, and the skew
// schedule shifts the key distribution over time.
PhaseContext run_continuous(const ExperimentConfig& cfg);

struct ExperimentResult {
  std::vector<PhaseStats> reps;
  std::string csv;
};

// repetitions x (phase1, phase2) — or one continuous run — plus the CSV
// report (one row per repetition, then mean and rse rows). Writes the CSV to
// cfg.out_path when set.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

std::string render_csv(const ExperimentConfig& cfg, const std::vector<PhaseStats>& reps);

// Stable per-(rep, purpose) seed derivation.
uint64_t derive_seed(uint64_t seed, uint64_t salt);

}  // namespace txnlab
