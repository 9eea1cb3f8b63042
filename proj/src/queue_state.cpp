#include "txnlab/queue_state.hpp"

#include <algorithm>
#include <cstdio>
#include <unordered_set>

namespace txnlab {

void State::on_enqueue(const std::set<Reference>& refs, uint32_t queue, uint64_t now_ns) {
  for (const Reference& r : refs) {
    entries_.apply(
        r.token, [this] { return std::make_shared<StateEntry>(queue_count_); },
        [&](StateEntry& e) {
          const uint32_t count =
              e.queue_counts[queue].fetch_add(1, std::memory_order_relaxed) + 1;
          e.total.fetch_add(1, std::memory_order_relaxed);

          const uint64_t last = e.last_touched_ns.load(std::memory_order_relaxed);
          const double dt =
              now_ns > last ? static_cast<double>(now_ns - last) / kNsPerSec : 0.0;
          const double decayed =
              e.rate.load(std::memory_order_relaxed) * std::exp2(-dt / kRateHalfLifeSecs);
          e.rate.store(decayed + 1.0, std::memory_order_relaxed);
          e.last_touched_ns.store(now_ns, std::memory_order_relaxed);

          const uint32_t cur = e.argmax.load(std::memory_order_relaxed);
          if (queue != cur) {
            const uint32_t cur_count = e.queue_counts[cur].load(std::memory_order_relaxed);
            if (count > cur_count || (count == cur_count && queue < cur)) {
              e.argmax.store(queue, std::memory_order_relaxed);
            }
          }
        });
  }
  totals_[queue].fetch_add(refs.size(), std::memory_order_relaxed);
}

std::vector<uint32_t> State::queue_counts(const Reference& ref) const {
  std::vector<uint32_t> out(queue_count_, 0);
  if (auto e = entries_.find(ref.token)) {
    for (size_t i = 0; i < queue_count_; ++i) {
      out[i] = e->queue_counts[i].load(std::memory_order_relaxed);
    }
  }
  return out;
}

uint32_t State::least_loaded_queue() const {
  uint32_t best = 0;
  uint64_t best_total = totals_[0].load(std::memory_order_relaxed);
  for (uint32_t q = 1; q < queue_count_; ++q) {
    const uint64_t t = totals_[q].load(std::memory_order_relaxed);
    if (t < best_total) {
      best = q;
      best_total = t;
    }
  }
  return best;
}

void State::subtract_entry_totals(const StateEntry& e) {
  for (size_t q = 0; q < queue_count_; ++q) {
    const uint64_t c = e.queue_counts[q].load(std::memory_order_relaxed);
    if (c != 0) totals_[q].fetch_sub(c, std::memory_order_relaxed);
  }
}

size_t State::evict_stale(uint64_t now_ns, const EvictConfig& cfg) {
  uint64_t hot;
  if (cfg.hot_override) {
    hot = *cfg.hot_override;
  } else {
    // Nearest-rank 75th percentile of the current per-queue totals.
    std::vector<uint64_t> totals = total_per_queue();
    std::sort(totals.begin(), totals.end());
    const size_t rank = (totals.size() * 3 + 3) / 4;  // ceil(0.75 * n)
    hot = totals[rank == 0 ? 0 : rank - 1];
  }

  return entries_.erase_if([&](const std::string&, const StateEntry& e) {
    if (e.rate_at(now_ns) >= cfg.rate_min) return false;
    if (e.total.load(std::memory_order_relaxed) >= cfg.total_min) return false;
    const uint32_t q = e.argmax.load(std::memory_order_relaxed);
    if (totals_[q].load(std::memory_order_relaxed) <= hot) return false;
    subtract_entry_totals(e);
    return true;
  });
}

size_t State::enforce_cap(uint64_t now_ns, size_t cap) {
  const size_t n = entries_.size();
  if (n <= cap) return 0;
  std::vector<std::pair<double, std::string>> rates;
  rates.reserve(n);
  entries_.for_each([&](const std::string& key, const std::shared_ptr<StateEntry>& e) {
    rates.emplace_back(e->rate_at(now_ns), key);
  });
  if (rates.size() <= cap) return 0;
  const size_t excess = rates.size() - cap;
  std::nth_element(rates.begin(), rates.begin() + excess, rates.end());
  std::unordered_set<std::string> victims;
  victims.reserve(excess);
  for (size_t i = 0; i < excess; ++i) victims.insert(std::move(rates[i].second));
  return entries_.erase_if([&](const std::string& key, const StateEntry& e) {
    if (victims.count(key) == 0) return false;
    subtract_entry_totals(e);
    return true;
  });
}

void State::snapshot_csv(std::ostream& out) const {
  struct Row {
    std::string ref;
    std::vector<uint32_t> counts;
    double rate;
    uint64_t total;
    uint32_t argmax;
  };
  std::vector<Row> rows;
  entries_.for_each([&](const std::string& key, const std::shared_ptr<StateEntry>& e) {
    Row r;
    r.ref = key;
    r.counts.resize(queue_count_);
    for (size_t q = 0; q < queue_count_; ++q) {
      r.counts[q] = e->queue_counts[q].load(std::memory_order_relaxed);
    }
    r.rate = e->rate.load(std::memory_order_relaxed);
    r.total = e->total.load(std::memory_order_relaxed);
    r.argmax = e->argmax.load(std::memory_order_relaxed);
    rows.push_back(std::move(r));
  });
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.ref < b.ref; });

  out << "reference";
  for (size_t q = 0; q < queue_count_; ++q) out << ",count_q" << q;
  out << ",rate_r,total_t,argmax_q\n";
  char buf[32];
  for (const Row& r : rows) {
    out << r.ref;
    for (uint32_t c : r.counts) out << ',' << c;
    std::snprintf(buf, sizeof(buf), "%.6f", r.rate);
    out << ',' << buf << ',' << r.total << ',' << r.argmax << '\n';
  }
}

}  // namespace txnlab
