#include "deim/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "deim/errors.hpp"

namespace deim {

double accuracy(std::span<const int> preds, std::span<const int> labels) {
  if (preds.size() != labels.size()) {
    throw DimensionError("accuracy: " + std::to_string(preds.size()) + " predictions for " +
                         std::to_string(labels.size()) + " labels");
  }
  if (preds.empty()) throw DataError("accuracy of an empty set");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) hits += preds[i] == labels[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

RankingMetrics map_mrr(const std::vector<std::vector<ScoredCandidate>>& groups, bool include_no_answer) {
  RankingMetrics m;
  // Extended precision so closed-form fixtures such as (1 + 2/3) / 2 round to the nearest double.
  long double ap_total = 0.0L;
  long double rr_total = 0.0L;
  std::vector<std::size_t> order;
  for (const auto& g : groups) {
    const auto relevant = std::count_if(g.begin(), g.end(), [](const auto& c) { return c.relevant; });
    if (relevant == 0) {
      ++m.groups_without_answer;
      if (include_no_answer) ++m.groups_evaluated;
      continue;
    }
    order.resize(g.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return g[a].score > g[b].score; });
    long double precision_sum = 0.0L;
    long double reciprocal = 0.0L;
    std::size_t hits = 0;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
      if (!g[order[rank]].relevant) continue;
      ++hits;
      precision_sum += static_cast<long double>(hits) / static_cast<long double>(rank + 1);
      if (hits == 1) reciprocal = 1.0L / static_cast<long double>(rank + 1);
    }
    ap_total += precision_sum / static_cast<long double>(relevant);
    rr_total += reciprocal;
    ++m.groups_evaluated;
  }
  if (m.groups_evaluated > 0) {
    m.map = static_cast<double>(ap_total / static_cast<long double>(m.groups_evaluated));
    m.mrr = static_cast<double>(rr_total / static_cast<long double>(m.groups_evaluated));
  }
  return m;
}

}  // namespace deim
