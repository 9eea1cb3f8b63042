#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>

namespace txnlab {

// Time source used by the engine, metrics and rate estimators. The real
// implementation wraps the steady clock; the virtual one is advanced manually
// by the deterministic runner so that timing-derived output is reproducible.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual uint64_t now_ns() const = 0;
};

class RealClock final : public Clock {
 public:
  uint64_t now_ns() const override {
    return static_cast<uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(
            std::chrono::steady_clock::now().time_since_epoch())
            .count());
  }
};

class VirtualClock final : public Clock {
 public:
  uint64_t now_ns() const override { return ns_.load(std::memory_order_relaxed); }
  void advance_ns(uint64_t delta) { ns_.fetch_add(delta, std::memory_order_relaxed); }
  void set_ns(uint64_t value) { ns_.store(value, std::memory_order_relaxed); }

 private:
  std::atomic<uint64_t> ns_{0};
};

inline constexpr uint64_t kNsPerSec = 1'000'000'000ull;

}  // namespace txnlab
