#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "melkit/fuzzy.hpp"
#include "melkit/index.hpp"
#include "melkit/retrieval.hpp"
#include "melkit/selection.hpp"
#include "melkit/types.hpp"
#include "melkit/util.hpp"

// Reference implementations the tests cross-check the library against. Each
// oracle recomputes its result through a different algorithm than the
// production code:
//   - string similarity runs a full-matrix insert/delete edit-distance DP,
//     where the library uses a two-row LCS recurrence;
//   - ranks come from sorting a copy of the candidate list, where the library
//     counts strictly-greater scores in a single scan;
//   - retrieval repeatedly extracts the maximum from brute-force dot products,
//     where the library sorts a scored array once.
// Only the UTF-8 decode/fold helpers are shared with the implementation.

namespace oracle {

// Insert/delete edit distance over codepoints, full (|a|+1) x (|b|+1) matrix.
// Substitution is not allowed: the diagonal move applies only on equality.
inline std::size_t indel_distance(const std::vector<char32_t>& a,
                                  const std::vector<char32_t>& b) {
  const std::size_t m = a.size(), n = b.size();
  std::vector<std::vector<std::size_t>> dp(m + 1, std::vector<std::size_t>(n + 1, 0));
  for (std::size_t i = 0; i <= m; ++i) dp[i][0] = i;
  for (std::size_t j = 0; j <= n; ++j) dp[0][j] = j;
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      std::size_t best = std::min(dp[i - 1][j], dp[i][j - 1]) + 1;
      if (a[i - 1] == b[j - 1]) best = std::min(best, dp[i - 1][j - 1]);
      dp[i][j] = best;
    }
  }
  return dp[m][n];
}

// 100 * (1 - D / (|a|+|b|)) rounded half up, in exact integer arithmetic.
inline int indel_ratio(const std::string& a, const std::string& b) {
  const std::vector<char32_t> fa = melkit::fold_codepoints(a);
  const std::vector<char32_t> fb = melkit::fold_codepoints(b);
  const std::size_t total = fa.size() + fb.size();
  if (total == 0) return 100;
  const std::size_t dist = indel_distance(fa, fb);
  return static_cast<int>((200 * (total - dist) + total) / (2 * total));
}

// Coarse candidates recomputed from the oracle ratio, ordered by a sort on
// (score descending, id ascending).
inline std::vector<melkit::FuzzyScore> coarse(const std::string& mention_name,
                                              const std::vector<melkit::Entity>& entities,
                                              std::size_t n) {
  std::vector<melkit::FuzzyScore> scored;
  for (const auto& e : entities) scored.push_back({e.id, indel_ratio(mention_name, e.name)});
  std::stable_sort(scored.begin(), scored.end(),
                   [](const melkit::FuzzyScore& x, const melkit::FuzzyScore& y) {
                     if (x.score != y.score) return x.score > y.score;
                     return x.entity_id < y.entity_id;
                   });
  if (scored.size() > n) scored.resize(n);
  return scored;
}

// Effective rank of the gold entity, computed by sorting: candidates ordered
// by score descending with the gold winning every tie; a selection choice, if
// one exists, is pulled to the front first. Rank = the gold's sorted position.
inline std::optional<std::size_t> effective_rank(const melkit::LinkResult& result,
                                                 const std::string& gold_id) {
  long gold_pos = -1;
  for (std::size_t i = 0; i < result.entries.size(); ++i) {
    if (result.entries[i].entity_id == gold_id) {
      gold_pos = static_cast<long>(i);
      break;
    }
  }
  if (gold_pos < 0) return std::nullopt;
  if (result.selection_used && result.chosen_index == static_cast<std::size_t>(gold_pos))
    return 0;

  struct Row {
    float score;
    bool gold;
  };
  std::vector<Row> rows;
  for (std::size_t i = 0; i < result.entries.size(); ++i) {
    if (result.selection_used && i == result.chosen_index) continue;
    rows.push_back({result.entries[i].score, i == static_cast<std::size_t>(gold_pos)});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& x, const Row& y) {
    if (x.score != y.score) return x.score > y.score;
    return x.gold && !y.gold;
  });
  std::size_t pos = 0;
  while (pos < rows.size() && !rows[pos].gold) ++pos;
  return pos + (result.selection_used ? 1 : 0);
}

inline double topk_accuracy(const std::vector<melkit::LinkResult>& results,
                            const std::unordered_map<std::string, std::string>& golds,
                            std::size_t k) {
  std::size_t correct = 0;
  for (const auto& r : results) {
    auto rank = effective_rank(r, golds.at(r.mention_id));
    if (rank && *rank < k) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(results.size());
}

// Brute-force cosine retrieval: normalize a copy of the query, dot it against
// every eligible row, then extract the best remaining candidate k times
// (score descending, id ascending on ties).
inline std::vector<melkit::ScoredEntity> retrieve(
    const std::vector<float>& query_in, const melkit::VectorIndex& index, std::size_t k,
    const std::optional<std::unordered_set<std::string>>& restrict_to = std::nullopt) {
  std::vector<float> query = query_in;
  double norm = 0.0;
  for (float x : query) norm += static_cast<double>(x) * x;
  norm = std::sqrt(norm);
  for (auto& x : query) x = static_cast<float>(x / norm);

  std::vector<melkit::ScoredEntity> pool;
  for (std::size_t i = 0; i < index.count(); ++i) {
    if (restrict_to && !restrict_to->count(index.ids[i])) continue;
    const float* row = index.row(i);
    double dot = 0.0;
    for (std::uint32_t d = 0; d < index.dim; ++d)
      dot += static_cast<double>(query[d]) * row[d];
    pool.push_back({index.ids[i], static_cast<float>(dot)});
  }

  std::vector<melkit::ScoredEntity> out;
  std::vector<char> used(pool.size(), 0);
  while (out.size() < k) {
    long best = -1;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (used[i]) continue;
      if (best < 0 || pool[i].score > pool[static_cast<std::size_t>(best)].score ||
          (pool[i].score == pool[static_cast<std::size_t>(best)].score &&
           pool[i].entity_id < pool[static_cast<std::size_t>(best)].entity_id))
        best = static_cast<long>(i);
    }
    if (best < 0) break;
    used[static_cast<std::size_t>(best)] = 1;
    out.push_back(pool[static_cast<std::size_t>(best)]);
  }
  return out;
}

}  // namespace oracle
