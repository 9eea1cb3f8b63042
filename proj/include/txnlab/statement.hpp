#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace txnlab {

// Scalar column value: integers render as decimal, strings verbatim.
using Value = std::variant<int64_t, std::string>;

std::string render_value(const Value& v);

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class StatementKind : uint8_t { kSelect, kUpdate, kInsert, kDelete };

// Equality predicate from a WHERE conjunction. Unlabeled predicates execute
// normally (key resolution, row filtering) but emit no reference — selector
// columns with tiny value domains whose tokens would carry no useful conflict
// signal (e.g. slot-type columns shared by every key).
struct Predicate {
  std::string attr;
  Value value;
  bool labeled = true;
};

// How an assignment mutates its column. Literal values come from the
// transaction's input parameters; captured values are computed mid-execution
// (running sum of columns read via Statement::captures) and therefore emit no
// reference.
enum class WriteExpr : uint8_t {
  kSet,             // col = literal
  kAdd,             // col = col + literal
  kAddCaptured,     // col = col + captured_sum
  kSubWithPenalty,  // col = col - literal - (captured_sum < literal ? 1 : 0)
};

struct ColumnWrite {
  std::string attr;
  Value value;  // literal operand; ignored by kAddCaptured
  WriteExpr expr = WriteExpr::kSet;
  // Unlabeled writes execute normally but emit no reference (bookkeeping
  // columns such as sequence numbers that carry no conflict signal).
  bool labeled = true;
};

struct Statement {
  StatementKind kind = StatementKind::kSelect;
  std::string table;
  std::vector<Predicate> where;   // equality conjunction, statement order
  std::vector<ColumnWrite> sets;  // SET list (UPDATE) or VALUES list (INSERT)
  std::vector<std::string> captures;  // SELECT: columns summed into captured_sum
};

// A conflict-prediction token, e.g. "s_w_id=5" or "s_i_id=2 AND s_w_id=5".
struct Reference {
  std::string token;

  friend bool operator<(const Reference& a, const Reference& b) { return a.token < b.token; }
  friend bool operator==(const Reference& a, const Reference& b) { return a.token == b.token; }
};

// Attribute -> canonical domain (foreign keys collapse onto the referenced
// key; every other attribute maps to itself). Total over the workload's
// attributes; an unknown attribute is a configuration error.
class DomainMap {
 public:
  DomainMap() = default;
  explicit DomainMap(std::unordered_map<std::string, std::string> mapping)
      : map_(std::move(mapping)) {}

  void add(std::string attr, std::string domain) { map_[std::move(attr)] = std::move(domain); }
  void add_identity(const std::string& attr) { map_.emplace(attr, attr); }

  const std::string& canonical(const std::string& attr) const {
    auto it = map_.find(attr);
    if (it == map_.end()) {
      throw ConfigError("domain map has no entry for attribute '" + attr + "'");
    }
    return it->second;
  }

  bool contains(const std::string& attr) const { return map_.count(attr) != 0; }
  size_t size() const { return map_.size(); }

 private:
  std::unordered_map<std::string, std::string> map_;
};

enum class RefRep : uint8_t { kLiteral, kCanonical };
enum class RefGran : uint8_t { kSingle, kAll };

struct Transaction {
  uint64_t txn_id = 0;
  int32_t txn_type = 0;
  // Generator payload; statements can be rebuilt from it, so queued
  // transactions may drop the materialized statement list to stay small.
  std::vector<int32_t> params;
  std::vector<Statement> statements;
  std::optional<int64_t> partition_key;
  uint64_t arrival_ns = 0;   // start of scheduling work; response time base
  uint32_t queue = 0;        // run queue the scheduler assigned
  int attempts = 0;
  std::set<Reference> refs;  // extracted at dispatch when a policy needs them
};

std::set<Reference> extract_references(const std::vector<Statement>& statements, RefRep rep,
                                       RefGran gran, const DomainMap& dm);

inline std::set<Reference> extract_references(const Transaction& txn, RefRep rep, RefGran gran,
                                              const DomainMap& dm) {
  return extract_references(txn.statements, rep, gran, dm);
}

}  // namespace txnlab
