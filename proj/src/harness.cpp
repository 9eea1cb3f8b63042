#include "txnlab/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <thread>

namespace txnlab {
namespace {

constexpr double kRtInitialTps = 5000.0;
constexpr uint64_t kRtPollNs = 200'000'000;       // controller update interval
constexpr uint64_t kHousekeepPollNs = 100'000'000;
constexpr auto kBackoff = std::chrono::microseconds(50);

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

double parse_double(const std::string& text, const char* what) {
  try {
    size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(std::string("cannot parse ") + what + " from '" + text + "'");
  }
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  size_t start = 0;
  while (start <= text.size()) {
    const size_t end = text.find(sep, start);
    if (end == std::string::npos) {
      parts.push_back(text.substr(start));
      break;
    }
    parts.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return parts;
}

}  // namespace

uint64_t derive_seed(uint64_t seed, uint64_t salt) {
  return splitmix64(seed ^ splitmix64(salt));
}

ThrottleConfig ThrottleConfig::parse(const std::string& text) {
  ThrottleConfig cfg;
  if (text.empty() || text == "none") return cfg;
  if (text.rfind("rate:", 0) == 0) {
    cfg.mode = ThrottleMode::kFixedRate;
    cfg.rate_tps = parse_double(text.substr(5), "throttle rate");
    if (cfg.rate_tps <= 0) throw ConfigError("throttle rate must be positive");
    return cfg;
  }
  if (text.rfind("rt:", 0) == 0) {
    cfg.mode = ThrottleMode::kResponseTime;
    cfg.target_rt_ms = parse_double(text.substr(3), "throttle response-time target");
    if (cfg.target_rt_ms <= 0) throw ConfigError("throttle target must be positive");
    return cfg;
  }
  throw ConfigError("unknown throttle '" + text + "' (expected none, rate:<tps>, or rt:<ms>)");
}

TokenBucket::TokenBucket(double rate_per_sec, uint64_t start_ns)
    : rate_(rate_per_sec), last_ns_(start_ns) {}

bool TokenBucket::try_take(uint64_t now_ns) {
  if (now_ns > last_ns_) {
    tokens_ += rate_ * static_cast<double>(now_ns - last_ns_) / 1e9;
    last_ns_ = now_ns;
  }
  tokens_ = std::min(tokens_, 1.0);  // one-token burst: no catch-up spikes
  if (tokens_ >= 1.0) {
    tokens_ -= 1.0;
    return true;
  }
  return false;
}

RateController::RateController(double target_ms, double initial_tps, double min_tps,
                               double max_tps)
    : target_ms_(target_ms), rate_(initial_tps), min_tps_(min_tps), max_tps_(max_tps) {}

double RateController::update(double observed_mean_rt_ms) {
  if (observed_mean_rt_ms > 0.0) {
    const double factor = std::clamp(target_ms_ / observed_mean_rt_ms, 0.5, 1.2);
    rate_ = std::clamp(rate_ * factor, min_tps_, max_tps_);
  }
  return rate_;
}

std::vector<SkewPhase> parse_skew_schedule(const std::string& text) {
  std::vector<SkewPhase> phases;
  if (text.empty()) return phases;
  for (const std::string& part : split(text, ',')) {
    const size_t colon = part.find(':');
    if (colon == std::string::npos) {
      throw ConfigError("skew phase '" + part + "' is not <dist>:<seconds>");
    }
    const std::string dist = part.substr(0, colon);
    SkewPhase phase;
    phase.seconds = parse_double(part.substr(colon + 1), "skew phase duration");
    if (phase.seconds <= 0) throw ConfigError("skew phase duration must be positive");
    if (dist == "uniform") {
      phase.theta = 0.0;
    } else if (dist.rfind("zipf", 0) == 0) {
      phase.theta = parse_double(dist.substr(4), "zipf theta");
      if (phase.theta < 0) throw ConfigError("zipf theta must be non-negative");
    } else {
      throw ConfigError("unknown skew distribution '" + dist + "'");
    }
    phases.push_back(phase);
  }
  return phases;
}

EvictConfig parse_evict(const std::string& text) {
  EvictConfig cfg;
  if (text.empty()) return cfg;
  for (const std::string& part : split(text, ',')) {
    const size_t eqpos = part.find('=');
    if (eqpos == std::string::npos) {
      throw ConfigError("eviction setting '" + part + "' is not key=value");
    }
    const std::string key = part.substr(0, eqpos);
    const std::string value = part.substr(eqpos + 1);
    if (key == "r") {
      cfg.rate_min = parse_double(value, "eviction rate threshold");
    } else if (key == "t") {
      cfg.total_min = static_cast<uint64_t>(parse_double(value, "eviction total threshold"));
    } else if (key == "window") {
      cfg.window_secs = parse_double(value, "eviction window");
    } else if (key == "cap") {
      cfg.cap = static_cast<size_t>(parse_double(value, "eviction cap"));
    } else if (key == "hot") {
      cfg.hot_override = static_cast<uint64_t>(parse_double(value, "eviction hot threshold"));
    } else {
      throw ConfigError("unknown eviction setting '" + key + "'");
    }
  }
  return cfg;
}

namespace {

// The two-phase protocol and the continuous mode share one dispatch loop;
// this bundle says which pieces are active.
struct RunPlan {
  PolicyConfig dispatch;        // assigns queues
  PolicyConfig shape;           // reference representation/granularity
  History* record_into = nullptr;
  const History* read_history = nullptr;
  bool live_state = false;
  double duration_secs = 0.0;
  uint64_t gen_salt = 0;
  uint64_t policy_salt = 0;
  uint64_t steal_salt = 0;
  bool continuous = false;
};

void attach_history_hook(Engine& engine, History* history) {
  EngineHooks hooks;
  hooks.on_attempt = [history](Transaction& txn, AttemptStatus status) {
    if (status == AttemptStatus::kCommitted) {
      history->record_commit(txn.refs);
    } else if (is_retryable_abort(status)) {
      history->record_abort(txn.refs);
    }
  };
  engine.set_hooks(std::move(hooks));
}

PhaseContext run_phase(const ExperimentConfig& cfg, uint64_t rep_seed, const RunPlan& plan) {
  if (cfg.worker_threads < 1) throw ConfigError("worker_threads must be at least 1");

  PhaseContext ctx;
  ctx.workload = make_workload(
      cfg.benchmark, WorkloadConfig{cfg.scale, cfg.warehouses, derive_seed(rep_seed, 1)});
  ctx.db = std::make_unique<Database>(ctx.workload->make_schema(), cfg.protocol);
  if (cfg.commit_log) {
    ctx.log = std::make_unique<CommitLog>();
    ctx.db->set_commit_log(ctx.log.get());
  }
  ctx.workload->populate(*ctx.db);

  const double duration = plan.duration_secs;
  ctx.metrics = std::make_unique<Metrics>(cfg.worker_threads,
                                          static_cast<size_t>(duration) + 120);
  if (plan.live_state) ctx.state = std::make_unique<State>(cfg.worker_threads);

  RealClock real_clock;
  VirtualClock virtual_clock;
  const Clock& clock = cfg.deterministic ? static_cast<const Clock&>(virtual_clock)
                                         : static_cast<const Clock&>(real_clock);
  if (cfg.deterministic) virtual_clock.set_ns(kNsPerSec);

  EngineConfig engine_cfg;
  engine_cfg.worker_count = cfg.worker_threads;
  engine_cfg.coop_yield = cfg.coop_yield;
  engine_cfg.no_wait = cfg.no_wait;
  engine_cfg.steal_seed = derive_seed(rep_seed, plan.steal_salt);
  if (cfg.deterministic) {
    engine_cfg.virtual_clock = &virtual_clock;
    engine_cfg.virtual_step_ns = 1'000;
  }
  Engine engine(*ctx.db, *ctx.metrics, clock, engine_cfg);
  if (plan.record_into != nullptr) attach_history_hook(engine, plan.record_into);

  const bool need_refs = plan.record_into != nullptr || plan.dispatch.intelligent();
  std::mt19937_64 gen_rng(derive_seed(rep_seed, plan.gen_salt));
  std::mt19937_64 policy_rng(derive_seed(rep_seed, plan.policy_salt));

  const uint64_t start_ns = clock.now_ns();
  const uint64_t end_ns = start_ns + static_cast<uint64_t>(duration * 1e9);
  ctx.metrics->set_start_ns(start_ns);

  // Throttling.
  TokenBucket bucket(cfg.throttle.mode == ThrottleMode::kFixedRate ? cfg.throttle.rate_tps
                                                                   : kRtInitialTps,
                     start_ns);
  RateController controller(cfg.throttle.target_rt_ms, kRtInitialTps);
  uint64_t next_rt_poll_ns = start_ns + kRtPollNs;
  uint64_t rt_last_commits = 0;
  uint64_t rt_last_response_ns = 0;

  // Continuous-mode housekeeping timers.
  const uint64_t window_ns = static_cast<uint64_t>(cfg.evict.window_secs * 1e9);
  uint64_t next_evict_ns = start_ns + (window_ns > 0 ? window_ns : kNsPerSec);
  uint64_t next_regen_ns = start_ns + static_cast<uint64_t>(cfg.history_regen_seconds * 1e9);
  uint64_t next_sample_ns = start_ns + kNsPerSec;
  uint64_t next_housekeep_ns = start_ns;
  double prev_window_abort_rate = -1.0;
  uint64_t window_last_commits = 0;
  uint64_t window_last_aborts = 0;

  // Skew schedule boundaries (absolute).
  std::vector<std::pair<uint64_t, double>> skew_until;  // (end_ns, theta)
  uint64_t skew_cursor_ns = start_ns;
  for (const SkewPhase& phase : cfg.skew) {
    skew_cursor_ns += static_cast<uint64_t>(phase.seconds * 1e9);
    skew_until.emplace_back(skew_cursor_ns, phase.theta);
  }
  auto theta_at = [&skew_until](uint64_t now) {
    for (const auto& [until, theta] : skew_until) {
      if (now < until) return theta;
    }
    return skew_until.empty() ? 0.0 : skew_until.back().second;
  };

  auto housekeeping = [&](uint64_t now) {
    if (!plan.continuous) return;
    if (plan.record_into != nullptr && now >= next_regen_ns) {
      plan.record_into->regenerate();
      ++ctx.history_regens;
      next_regen_ns += static_cast<uint64_t>(cfg.history_regen_seconds * 1e9);
    }
    if (ctx.state && now >= next_evict_ns) {
      const uint64_t commits = ctx.metrics->commits();
      const uint64_t aborts = ctx.metrics->aborts();
      const uint64_t dc = commits - window_last_commits;
      const uint64_t da = aborts - window_last_aborts;
      window_last_commits = commits;
      window_last_aborts = aborts;
      const double window_rate = (dc + da) == 0 ? 0.0
                                                : static_cast<double>(da) /
                                                      static_cast<double>(dc + da);
      const bool stable = prev_window_abort_rate >= 0.0 &&
                          std::abs(window_rate - prev_window_abort_rate) < 0.02;
      prev_window_abort_rate = window_rate;
      if (cfg.eviction_enabled) {
        if (!cfg.stability_gate || stable) {
          ctx.state->evict_stale(now, cfg.evict);
          ++ctx.evict_passes;
        }
        ctx.state->enforce_cap(now, cfg.evict.cap);
      }
      next_evict_ns += window_ns > 0 ? window_ns : kNsPerSec;
    }
    if (ctx.state && now >= next_sample_ns) {
      const size_t entries = ctx.state->size();
      ctx.state_entries_per_sec.push_back(static_cast<uint32_t>(entries));
      ctx.state_entries_peak = std::max(ctx.state_entries_peak, entries);
      next_sample_ns += kNsPerSec;
    }
  };

  auto admit_one = [&](uint64_t now, double theta) {
    auto txn = ctx.workload->generate(gen_rng, ctx.stats.admitted + 1, theta);
    txn->arrival_ns = now;  // response time includes the scheduling work below
    if (need_refs) {
      txn->refs =
          extract_references(*txn, plan.shape.rep, plan.shape.gran, ctx.workload->domains());
    }
    const uint32_t queue =
        choose_queue(*txn, plan.dispatch, cfg.worker_threads,
                     plan.read_history != nullptr ? plan.read_history : plan.record_into,
                     plan.live_state ? ctx.state.get() : nullptr, policy_rng, clock.now_ns());
    engine.enqueue(std::move(txn), queue);
    ++ctx.stats.admitted;
  };

  if (cfg.deterministic) {
    const double rate = cfg.throttle.mode == ThrottleMode::kFixedRate ? cfg.throttle.rate_tps
                                                                      : cfg.det_arrival_tps;
    const uint64_t inter_ns = std::max<uint64_t>(1, static_cast<uint64_t>(1e9 / rate));
    while (true) {
      virtual_clock.advance_ns(inter_ns);
      const uint64_t now = virtual_clock.now_ns();
      if (now >= end_ns) break;
      housekeeping(now);
      admit_one(now, plan.continuous ? theta_at(now) : 0.0);
      engine.run_inline_until_empty();
    }
    virtual_clock.set_ns(std::max(virtual_clock.now_ns(), end_ns));
    ctx.stats.elapsed_secs = duration;
  } else {
    engine.start();
    while (true) {
      uint64_t now = real_clock.now_ns();
      if (now >= end_ns) break;
      if (now >= next_housekeep_ns) {
        housekeeping(now);
        next_housekeep_ns = now + kHousekeepPollNs / 10;
      }

      if (cfg.throttle.mode == ThrottleMode::kResponseTime && now >= next_rt_poll_ns) {
        const uint64_t commits = ctx.metrics->commits();
        const uint64_t response = ctx.metrics->response_ns_total();
        const uint64_t dc = commits - rt_last_commits;
        const double observed_ms =
            dc == 0 ? 0.0
                    : static_cast<double>(response - rt_last_response_ns) /
                          static_cast<double>(dc) / 1e6;
        rt_last_commits = commits;
        rt_last_response_ns = response;
        bucket.set_rate(controller.update(observed_ms));
        next_rt_poll_ns = now + kRtPollNs;
      }

      const uint64_t outstanding = ctx.stats.admitted - ctx.metrics->retired();
      if (outstanding >= cfg.max_outstanding) {
        std::this_thread::sleep_for(kBackoff);
        continue;
      }
      if (cfg.throttle.mode != ThrottleMode::kNone && !bucket.try_take(now)) {
        std::this_thread::sleep_for(kBackoff);
        continue;
      }
      admit_one(now, plan.continuous ? theta_at(now) : 0.0);
    }
    engine.stop(false);
    ctx.stats.elapsed_secs =
        static_cast<double>(real_clock.now_ns() - start_ns) / 1e9;
  }

  ctx.stats.attempts = engine.attempts();
  ctx.stats.metrics = ctx.metrics->snapshot(ctx.stats.elapsed_secs);
  return ctx;
}

}  // namespace

PhaseContext run_phase1(const ExperimentConfig& cfg, uint64_t rep_seed, History& history) {
  RunPlan plan;
  plan.dispatch = PolicyConfig{};  // random assignment
  plan.shape = PolicyConfig::parse(cfg.policy);
  plan.record_into = &history;
  plan.live_state = false;
  plan.duration_secs = cfg.phase1_seconds;
  plan.gen_salt = 2;
  plan.policy_salt = 4;
  plan.steal_salt = 6;
  history.set_writable(true);
  PhaseContext ctx = run_phase(cfg, rep_seed, plan);
  history.set_writable(false);
  return ctx;
}

PhaseContext run_phase2(const ExperimentConfig& cfg, uint64_t rep_seed, const History& history) {
  RunPlan plan;
  plan.dispatch = PolicyConfig::parse(cfg.policy);
  plan.shape = plan.dispatch;
  plan.read_history = &history;
  plan.live_state = plan.dispatch.intelligent();
  plan.duration_secs = cfg.phase2_seconds;
  plan.gen_salt = 3;
  plan.policy_salt = 5;
  plan.steal_salt = 7;
  return run_phase(cfg, rep_seed, plan);
}

PhaseContext run_continuous(const ExperimentConfig& cfg) {
  RunPlan plan;
  plan.dispatch = PolicyConfig::parse(cfg.policy);
  plan.shape = plan.dispatch;
  plan.live_state = plan.dispatch.intelligent();
  plan.continuous = true;
  plan.duration_secs = 0.0;
  for (const SkewPhase& phase : cfg.skew) plan.duration_secs += phase.seconds;
  if (plan.duration_secs == 0.0) plan.duration_secs = cfg.phase2_seconds;
  plan.gen_salt = 3;
  plan.policy_salt = 5;
  plan.steal_salt = 7;

  auto history = std::make_unique<History>();
  history->set_writable(true);
  plan.record_into = history.get();
  plan.read_history = history.get();

  PhaseContext ctx = run_phase(cfg, derive_seed(cfg.seed, 1), plan);
  ctx.history = std::move(history);
  return ctx;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  ExperimentResult result;
  if (cfg.continuous) {
    PhaseContext ctx = run_continuous(cfg);
    result.reps.push_back(ctx.stats);
  } else {
    const PolicyConfig policy = PolicyConfig::parse(cfg.policy);
    for (size_t rep = 0; rep < cfg.repetitions; ++rep) {
      const uint64_t rep_seed = derive_seed(cfg.seed, rep + 1);
      History history;
      if (policy.intelligent()) {
        run_phase1(cfg, rep_seed, history);
      } else {
        history.set_writable(false);
      }
      PhaseContext ctx = run_phase2(cfg, rep_seed, history);
      result.reps.push_back(ctx.stats);
    }
  }
  result.csv = render_csv(cfg, result.reps);
  if (!cfg.out_path.empty()) {
    std::ofstream out(cfg.out_path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open output path '" + cfg.out_path + "'");
    out << result.csv;
    if (!out.flush()) throw std::runtime_error("failed writing '" + cfg.out_path + "'");
  }
  return result;
}

std::string render_csv(const ExperimentConfig& cfg, const std::vector<PhaseStats>& reps) {
  const std::string policy_label = PolicyConfig::parse(cfg.policy).label();
  const char* protocol = cfg.protocol == Protocol::kOcc ? "occ" : "2pl";

  auto fmt = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return std::string(buf);
  };

  std::string out =
      "benchmark,policy,protocol,threads,rep,tps,abort_rate,mean_rt_us,p99_rt_us,"
      "write_aborts,read_aborts,stolen_fraction\n";
  const std::string prefix = cfg.benchmark + "," + policy_label + "," + protocol + "," +
                             std::to_string(cfg.worker_threads) + ",";

  std::vector<std::vector<double>> columns(7);
  for (size_t i = 0; i < reps.size(); ++i) {
    const MetricsSnapshot& m = reps[i].metrics;
    out += prefix + std::to_string(i + 1) + "," + fmt(m.tps) + "," + fmt(m.abort_rate) + "," +
           fmt(m.mean_rt_us) + "," + fmt(m.p99_rt_us) + "," + std::to_string(m.write_aborts()) +
           "," + std::to_string(m.read_aborts()) + "," + fmt(m.stolen_fraction) + "\n";
    columns[0].push_back(m.tps);
    columns[1].push_back(m.abort_rate);
    columns[2].push_back(m.mean_rt_us);
    columns[3].push_back(m.p99_rt_us);
    columns[4].push_back(static_cast<double>(m.write_aborts()));
    columns[5].push_back(static_cast<double>(m.read_aborts()));
    columns[6].push_back(m.stolen_fraction);
  }
  for (const char* agg : {"mean", "rse"}) {
    out += prefix + agg;
    for (const auto& column : columns) {
      out += "," + fmt(std::strcmp(agg, "mean") == 0 ? mean_of(column) : rse_of(column));
    }
    out += "\n";
  }
  return out;
}

}  // namespace txnlab
