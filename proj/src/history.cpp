#include "txnlab/history.hpp"

#include <algorithm>
#include <tuple>
#include <vector>

namespace txnlab {

void History::snapshot_csv(std::ostream& out) const {
  std::vector<std::tuple<std::string, uint64_t, uint64_t>> rows;
  entries_.for_each([&](const std::string& key, const std::shared_ptr<Entry>& e) {
    rows.emplace_back(key, e->aborts.load(std::memory_order_relaxed),
                      e->commits.load(std::memory_order_relaxed));
  });
  std::sort(rows.begin(), rows.end());
  out << "reference,abort_count,commit_count\n";
  for (const auto& [ref, aborts, commits] : rows) {
    out << ref << ',' << aborts << ',' << commits << '\n';
  }
}

}  // namespace txnlab
