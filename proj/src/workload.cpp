#include "txnlab/workload.hpp"

#include <algorithm>
#include <cmath>

namespace txnlab {

ZipfGen::ZipfGen(size_t n, double theta) : n_(n), theta_(theta) {
  if (n == 0) throw ConfigError("zipf sampler needs a non-empty domain");
  if (theta < 0.0) throw ConfigError("zipf theta must be non-negative");
  if (theta == 0.0) return;  // uniform: no table needed
  cdf_.resize(n);
  double running = 0.0;
  for (size_t k = 1; k <= n; ++k) {
    running += std::pow(static_cast<double>(k), -theta);
    cdf_[k - 1] = running;
  }
  const double total = running;
  for (double& c : cdf_) c /= total;
  cdf_.back() = 1.0;
}

int64_t ZipfGen::draw(std::mt19937_64& rng) const {
  if (theta_ == 0.0) return static_cast<int64_t>(rng() % n_) + 1;
  const double u = uniform01(rng);
  auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) --it;
  return static_cast<int64_t>(it - cdf_.begin()) + 1;
}

double ZipfGen::pmf(size_t rank) const {
  if (rank < 1 || rank > n_) return 0.0;
  if (theta_ == 0.0) return 1.0 / static_cast<double>(n_);
  const double lo = rank >= 2 ? cdf_[rank - 2] : 0.0;
  return cdf_[rank - 1] - lo;
}

size_t scaled_count(size_t base, double scale) {
  if (scale <= 0.0) throw ConfigError("scale factor must be positive");
  const double scaled = std::ceil(static_cast<double>(base) * scale);
  return std::max<size_t>(1, static_cast<size_t>(scaled));
}

const ZipfGen& Workload::zipf_for(double theta, size_t n) {
  const auto key = std::make_pair(theta, n);
  auto it = zipf_cache_.find(key);
  if (it == zipf_cache_.end()) it = zipf_cache_.emplace(key, ZipfGen(n, theta)).first;
  return it->second;
}

std::unique_ptr<Workload> make_tpcc_workload(const WorkloadConfig& cfg);
std::unique_ptr<Workload> make_smallbank_workload(const WorkloadConfig& cfg);
std::unique_ptr<Workload> make_tatp_workload(const WorkloadConfig& cfg);

std::unique_ptr<Workload> make_workload(const std::string& benchmark, const WorkloadConfig& cfg) {
  if (benchmark == "tpcc") return make_tpcc_workload(cfg);
  if (benchmark == "smallbank") return make_smallbank_workload(cfg);
  if (benchmark == "tatp") return make_tatp_workload(cfg);
  throw ConfigError("unknown benchmark '" + benchmark + "' (expected tpcc, smallbank, or tatp)");
}

}  // namespace txnlab
