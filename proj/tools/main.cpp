#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "txnlab/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "txnlab: a miniature in-memory OLTP engine whose transactions are routed to\n"
      "per-worker run queues by conflict-prediction policies learned from\n"
      "abort/commit history."};

  txnlab::ExperimentConfig cfg;
  std::string cc = "occ";
  std::string throttle = "none";
  std::string skew;
  std::string evict;
  bool no_eviction = false;
  bool no_stability_gate = false;
  bool no_coop_yield = false;

  app.add_option("--benchmark", cfg.benchmark, "Workload: tpcc, smallbank, or tatp")
      ->capture_default_str();
  app.add_option("--policy", cfg.policy,
                 "Queue policy: random, hard, or {count|fraction}/{sum|max}/"
                 "{literal|canonical}/{single|all}")
      ->capture_default_str();
  app.add_option("--cc", cc, "Concurrency control: occ or 2pl")->capture_default_str();
  app.add_option("--threads", cfg.worker_threads, "Worker threads (dispatch runs on its own)")
      ->capture_default_str();
  app.add_option("--warehouses", cfg.warehouses, "TPC-C warehouses (0 = derive from scale)")
      ->capture_default_str();
  app.add_option("--scale", cfg.scale, "Table-size scale factor")->capture_default_str();
  app.add_option("--phase1-secs", cfg.phase1_seconds, "History-collection phase duration")
      ->capture_default_str();
  app.add_option("--phase2-secs", cfg.phase2_seconds, "Measured phase duration")
      ->capture_default_str();
  app.add_option("--reps", cfg.repetitions, "Repetitions averaged into the report")
      ->capture_default_str();
  app.add_option("--throttle", throttle, "none, rate:<tps>, or rt:<ms>")
      ->capture_default_str();
  app.add_option("--skew", skew,
                 "Skew schedule for continuous mode, e.g. uniform:20,zipf0.3:20,uniform:20");
  app.add_flag("--continuous", cfg.continuous,
               "Single long run with live history, regeneration, and state eviction");
  app.add_option("--history-regen-secs", cfg.history_regen_seconds,
                 "Continuous mode: rebuild the history from scratch this often")
      ->capture_default_str();
  app.add_option("--seed", cfg.seed, "Root RNG seed")->capture_default_str();
  app.add_option("--out", cfg.out_path, "Write the CSV report to this path");
  app.add_option("--evict", evict,
                 "Eviction thresholds, e.g. r=0.5,t=5,window=5[,cap=100000][,hot=N]");
  app.add_flag("--no-eviction", no_eviction, "Continuous mode: disable state eviction");
  app.add_flag("--no-stability-gate", no_stability_gate,
               "Continuous mode: evict on every window regardless of abort-rate stability");
  app.add_option("--max-outstanding", cfg.max_outstanding,
                 "Open-loop injection bound on in-flight transactions")
      ->capture_default_str();
  app.add_flag("--no-wait", cfg.no_wait, "2PL: die on any lock conflict instead of wait-die");
  app.add_flag("--no-coop-yield", no_coop_yield,
               "Do not yield between statements (multi-core hosts)");
  app.add_flag("--deterministic", cfg.deterministic,
               "Virtual clock + inline execution; byte-identical output per seed");
  app.add_option("--det-tps", cfg.det_arrival_tps,
                 "Deterministic mode: virtual arrivals per second")
      ->capture_default_str();
  app.add_flag("--commit-log", cfg.commit_log, "Attach a replay log (verification runs)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cc == "occ") {
      cfg.protocol = txnlab::Protocol::kOcc;
    } else if (cc == "2pl") {
      cfg.protocol = txnlab::Protocol::kTwoPl;
    } else {
      throw txnlab::ConfigError("unknown concurrency control '" + cc + "' (occ or 2pl)");
    }
    cfg.throttle = txnlab::ThrottleConfig::parse(throttle);
    cfg.skew = txnlab::parse_skew_schedule(skew);
    cfg.evict = txnlab::parse_evict(evict);
    cfg.eviction_enabled = !no_eviction;
    cfg.stability_gate = !no_stability_gate;
    cfg.coop_yield = !no_coop_yield;
    txnlab::PolicyConfig::parse(cfg.policy);  // fail fast on a bad policy string

    const txnlab::ExperimentResult result = txnlab::run_experiment(cfg);
    std::cout << result.csv;
    return 0;
  } catch (const txnlab::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
