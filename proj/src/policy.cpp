#include "txnlab/policy.hpp"

#include <algorithm>
#include <sstream>

namespace txnlab {

std::string PolicyConfig::label() const {
  switch (mode) {
    case PolicyMode::kRandom:
      return "random";
    case PolicyMode::kHardPartition:
      return "hard";
    case PolicyMode::kIntelligent:
      break;
  }
  std::string s;
  s += weight == WeightKind::kCount ? "count" : "fraction";
  s += combine == CombineKind::kSum ? "/sum" : "/max";
  s += rep == RefRep::kLiteral ? "/literal" : "/canonical";
  s += gran == RefGran::kSingle ? "/single" : "/all";
  return s;
}

PolicyConfig PolicyConfig::parse(const std::string& text) {
  PolicyConfig cfg;
  if (text == "random") {
    cfg.mode = PolicyMode::kRandom;
    return cfg;
  }
  if (text == "hard") {
    cfg.mode = PolicyMode::kHardPartition;
    return cfg;
  }
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, '/')) parts.push_back(part);
  if (parts.size() != 4) {
    throw ConfigError("bad policy '" + text +
                      "': expected random, hard, or weight/combine/rep/granularity");
  }
  cfg.mode = PolicyMode::kIntelligent;
  if (parts[0] == "count") cfg.weight = WeightKind::kCount;
  else if (parts[0] == "fraction") cfg.weight = WeightKind::kFraction;
  else throw ConfigError("bad policy weight '" + parts[0] + "'");
  if (parts[1] == "sum") cfg.combine = CombineKind::kSum;
  else if (parts[1] == "max") cfg.combine = CombineKind::kMax;
  else throw ConfigError("bad policy combine '" + parts[1] + "'");
  if (parts[2] == "literal") cfg.rep = RefRep::kLiteral;
  else if (parts[2] == "canonical") cfg.rep = RefRep::kCanonical;
  else throw ConfigError("bad policy representation '" + parts[2] + "'");
  if (parts[3] == "single") cfg.gran = RefGran::kSingle;
  else if (parts[3] == "all") cfg.gran = RefGran::kAll;
  else throw ConfigError("bad policy granularity '" + parts[3] + "'");
  return cfg;
}

double weigh(const Reference& ref, WeightKind kind, const History& history) {
  if (kind == WeightKind::kCount) {
    return static_cast<double>(history.abort_count(ref));
  }
  return history.fraction(ref);
}

std::vector<std::pair<Reference, double>> select_refs(const std::set<Reference>& refs,
                                                      WeightKind weight, CombineKind combine,
                                                      const History& history) {
  std::vector<std::pair<Reference, double>> weighted;
  if (combine == CombineKind::kMax) {
    // Retain the highest weight; ties go to the lexicographically smallest
    // token, which is the first one std::set iteration order produces.
    const Reference* best = nullptr;
    double best_weight = 0.0;
    for (const Reference& r : refs) {
      const double w = weigh(r, weight, history);
      if (best == nullptr || w > best_weight) {
        best = &r;
        best_weight = w;
      }
    }
    if (best != nullptr) weighted.emplace_back(*best, best_weight);
    return weighted;
  }
  weighted.reserve(refs.size());
  for (const Reference& r : refs) weighted.emplace_back(r, weigh(r, weight, history));
  return weighted;
}

QueueScores score_selected(const std::vector<std::pair<Reference, double>>& selected,
                           const State& state) {
  const size_t q_count = state.queue_count();
  QueueScores result;
  result.scores.assign(q_count, 0.0);

  bool any_weight = false;
  for (const auto& [ref, w] : selected) {
    if (w == 0.0) continue;
    any_weight = true;
    if (auto entry = state.find(ref)) {
      for (size_t q = 0; q < q_count; ++q) {
        result.scores[q] += w * entry->queue_counts[q].load(std::memory_order_relaxed);
      }
    }
  }

  bool all_tied = true;
  for (size_t q = 1; q < q_count; ++q) {
    if (result.scores[q] != result.scores[0]) {
      all_tied = false;
      break;
    }
  }

  if (selected.empty() || !any_weight || all_tied) {
    result.used_default = true;
    result.chosen = state.least_loaded_queue();
    return result;
  }

  const double max_score = *std::max_element(result.scores.begin(), result.scores.end());
  const std::vector<uint64_t> totals = state.total_per_queue();
  uint32_t chosen = 0;
  bool have = false;
  uint64_t chosen_total = 0;
  for (uint32_t q = 0; q < q_count; ++q) {
    if (result.scores[q] != max_score) continue;
    if (!have || totals[q] < chosen_total) {
      chosen = q;
      chosen_total = totals[q];
      have = true;
    }
  }
  result.chosen = chosen;
  return result;
}

QueueScores score_queues(const std::set<Reference>& refs, WeightKind weight, CombineKind combine,
                         const History& history, const State& state) {
  return score_selected(select_refs(refs, weight, combine, history), state);
}

uint32_t choose_queue(Transaction& txn, const PolicyConfig& policy, size_t queue_count,
                      const History* history, State* state, std::mt19937_64& rng,
                      uint64_t now_ns, QueueScores* scores_out) {
  switch (policy.mode) {
    case PolicyMode::kRandom:
      return static_cast<uint32_t>(rng() % queue_count);
    case PolicyMode::kHardPartition: {
      if (!txn.partition_key) {
        throw ConfigError("hard partitioning requires a partition key");
      }
      const uint64_t key = static_cast<uint64_t>(*txn.partition_key);
      return static_cast<uint32_t>(key % queue_count);
    }
    case PolicyMode::kIntelligent:
      break;
  }
  QueueScores scores = score_queues(txn.refs, policy.weight, policy.combine, *history, *state);
  state->on_enqueue(txn.refs, scores.chosen, now_ns);
  const uint32_t chosen = scores.chosen;
  if (scores_out) *scores_out = std::move(scores);
  return chosen;
}

}  // namespace txnlab
