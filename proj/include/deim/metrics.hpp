#pragma once

#include <span>
#include <vector>

namespace deim {

/// Fraction of positions where preds[i] == labels[i]. Throws
/// DimensionError on a length mismatch and DataError when empty.
double accuracy(std::span<const int> preds, std::span<const int> labels);

struct ScoredCandidate {
  double score = 0.0;
  bool relevant = false;
};

struct RankingMetrics {
  double map = 0.0;
  double mrr = 0.0;
  std::size_t groups_evaluated = 0;
  std::size_t groups_without_answer = 0;
};

/// Mean average precision and mean reciprocal rank over groups. Candidates
/// are ranked by descending score; equal scores keep their input order.
/// Groups with no relevant candidate are skipped, or scored 0 when
/// `include_no_answer` is set.
RankingMetrics map_mrr(const std::vector<std::vector<ScoredCandidate>>& groups, bool include_no_answer = false);

}  // namespace deim
