#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "txnlab/history.hpp"
#include "txnlab/queue_state.hpp"
#include "txnlab/statement.hpp"

namespace txnlab {

enum class PolicyMode : uint8_t { kRandom, kHardPartition, kIntelligent };
enum class WeightKind : uint8_t { kCount, kFraction };
enum class CombineKind : uint8_t { kSum, kMax };

struct PolicyConfig {
  PolicyMode mode = PolicyMode::kRandom;
  WeightKind weight = WeightKind::kCount;
  CombineKind combine = CombineKind::kMax;
  RefRep rep = RefRep::kCanonical;
  RefGran gran = RefGran::kSingle;

  bool intelligent() const { return mode == PolicyMode::kIntelligent; }
  std::string label() const;

  // "random" | "hard" | "{count|fraction}/{sum|max}/{literal|canonical}/{single|all}"
  static PolicyConfig parse(const std::string& text);
};

struct QueueScores {
  std::vector<double> scores;
  bool used_default = false;
  uint32_t chosen = 0;
};

// Predicted conflict weight of one reference.
double weigh(const Reference& ref, WeightKind kind, const History& history);

// Sum keeps every reference; Max keeps the single highest-weight reference,
// ties resolved to the lexicographically smallest token. Result is sorted by
// token so downstream float accumulation is order-stable.
std::vector<std::pair<Reference, double>> select_refs(const std::set<Reference>& refs,
                                                      WeightKind weight, CombineKind combine,
                                                      const History& history);

// scores[q] = sum of weight * queue_counts(ref)[q] over the selected refs.
// Falls back to the least-loaded queue when there is no signal: no refs, all
// weights zero, all scores zero, or a full tie. Partial ties among maxima are
// broken by least-loaded-among-tied, then lowest index.
QueueScores score_selected(const std::vector<std::pair<Reference, double>>& selected,
                           const State& state);

QueueScores score_queues(const std::set<Reference>& refs, WeightKind weight, CombineKind combine,
                         const History& history, const State& state);

// Full scheduling step. Intelligent mode reads txn.refs (extracted by the
// caller), scores, then records the decision via state.on_enqueue.
uint32_t choose_queue(Transaction& txn, const PolicyConfig& policy, size_t queue_count,
                      const History* history, State* state, std::mt19937_64& rng,
                      uint64_t now_ns, QueueScores* scores_out = nullptr);

}  // namespace txnlab
