#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "txnlab/row_store.hpp"
#include "txnlab/statement.hpp"

namespace txnlab {

// Zipf(theta) sampler over ranks 1..n using the exact inverse CDF with a
// precomputed cumulative table; theta = 0 degenerates to uniform.
class ZipfGen {
 public:
  ZipfGen(size_t n, double theta);

  int64_t draw(std::mt19937_64& rng) const;
  double pmf(size_t rank) const;  // 1-based
  size_t n() const { return n_; }
  double theta() const { return theta_; }

 private:
  size_t n_;
  double theta_;
  std::vector<double> cdf_;
};

// Deterministic uniform double in [0, 1) from the generator's raw bits.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Scaled table size: ceil(base * scale), at least 1.
size_t scaled_count(size_t base, double scale);

struct WorkloadConfig {
  double scale = 0.1;
  int warehouses = 0;  // tpcc only: 0 = derive from scale
  uint64_t seed = 1;   // populate-time determinism
};

// A benchmark: schema, initial population, and a transaction generator.
// Generators run on the dispatch thread only; per-run mutable state (order id
// counters and the like) lives in the workload instance, so use a fresh
// instance per run.
class Workload {
 public:
  virtual ~Workload() = default;

  virtual const std::string& name() const = 0;
  virtual Schema make_schema() const = 0;
  virtual void populate(Database& db) = 0;
  // zipf_theta > 0 draws the partition attribute from Zipf(theta) instead of
  // the benchmark's default (uniform or hot-spot) distribution.
  virtual std::unique_ptr<Transaction> generate(std::mt19937_64& rng, uint64_t txn_id,
                                                double zipf_theta) = 0;
  virtual const DomainMap& domains() const = 0;
  virtual size_t txn_type_count() const = 0;
  virtual std::string txn_type_name(int32_t type) const = 0;

 protected:
  // Cached per-theta sampler over 1..n.
  const ZipfGen& zipf_for(double theta, size_t n);

 private:
  std::map<std::pair<double, size_t>, ZipfGen> zipf_cache_;
};

// benchmark is one of "tpcc", "smallbank", "tatp".
std::unique_ptr<Workload> make_workload(const std::string& benchmark, const WorkloadConfig& cfg);

}  // namespace txnlab
