#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "melkit/errors.hpp"
#include "melkit/types.hpp"
#include "melkit/util.hpp"

// Coarse candidate generation by fuzzy name matching.
//
// indel_ratio is a normalized insertion/deletion edit-distance similarity over
// case-folded Unicode scalar values: 100 * (1 - D/(|a|+|b|)) rounded
// half-away-from-zero, where D = |a|+|b| - 2*LCS(a,b). Identical strings
// (after folding) score 100; an empty vs a non-empty string scores 0.

namespace melkit {

struct FuzzyScore {
  std::string entity_id;
  int score = 0;  // 0..100
};

namespace detail {

// Length of the longest common subsequence, two-row DP.
inline std::size_t lcs_length(const std::vector<char32_t>& a,
                              const std::vector<char32_t>& b) {
  if (a.empty() || b.empty()) return 0;
  // Keep the inner loop over the shorter side.
  const auto& outer = a.size() >= b.size() ? a : b;
  const auto& inner = a.size() >= b.size() ? b : a;
  std::vector<std::size_t> prev(inner.size() + 1, 0), cur(inner.size() + 1, 0);
  for (std::size_t i = 1; i <= outer.size(); ++i) {
    for (std::size_t j = 1; j <= inner.size(); ++j) {
      if (outer[i - 1] == inner[j - 1])
        cur[j] = prev[j - 1] + 1;
      else
        cur[j] = std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[inner.size()];
}

}  // namespace detail

inline int indel_ratio(const std::string& a, const std::string& b) {
  std::vector<char32_t> fa = fold_codepoints(a);
  std::vector<char32_t> fb = fold_codepoints(b);
  const std::size_t total = fa.size() + fb.size();
  if (total == 0) return 100;  // both empty: identical
  const std::size_t lcs = detail::lcs_length(fa, fb);
  // ratio = 100 * 2*lcs / total, rounded half away from zero. The numerator is
  // non-negative, so round-half-up via (2*num + den) / (2*den).
  return static_cast<int>((400 * lcs + total) / (2 * total));
}

inline std::vector<FuzzyScore> coarse_candidates(const std::string& mention_name,
                                                 const std::vector<Entity>& entities,
                                                 std::size_t n) {
  if (n == 0)
    throw Error(ErrorCode::precondition, "coarse candidate count must be >= 1");
  std::vector<FuzzyScore> scored;
  scored.reserve(entities.size());
  const std::vector<char32_t> folded_name = fold_codepoints(mention_name);
  for (const auto& e : entities) {
    std::vector<char32_t> folded = fold_codepoints(e.name);
    const std::size_t total = folded_name.size() + folded.size();
    int score = 100;
    if (total != 0) {
      const std::size_t lcs = detail::lcs_length(folded_name, folded);
      score = static_cast<int>((400 * lcs + total) / (2 * total));
    }
    scored.push_back({e.id, score});
  }
  std::sort(scored.begin(), scored.end(), [](const FuzzyScore& x, const FuzzyScore& y) {
    if (x.score != y.score) return x.score > y.score;
    return x.entity_id < y.entity_id;
  });
  if (scored.size() > n) scored.resize(n);
  return scored;
}

// Candidate set seeded with externally provided candidate ids: the provided
// ids come first (score pinned to 100, input order preserved), then fuzzy
// matches fill the remainder up to n, skipping duplicates.
inline std::vector<FuzzyScore> seed_candidates(const Mention& mention,
                                               const std::vector<std::string>& provided,
                                               const std::vector<Entity>& entities,
                                               std::size_t n) {
  if (provided.empty()) return coarse_candidates(mention.name, entities, n);
  std::unordered_set<std::string> known;
  for (const auto& e : entities) known.insert(e.id);

  std::vector<FuzzyScore> out;
  std::unordered_set<std::string> seen;
  for (const auto& id : provided) {
    if (!known.count(id))
      throw Error(ErrorCode::unknown_entity_id,
                  "provided candidate '" + id + "' not in the knowledge base", id);
    if (seen.insert(id).second && out.size() < n) out.push_back({id, 100});
  }
  if (out.size() < n) {
    for (const auto& fs : coarse_candidates(mention.name, entities, n)) {
      if (out.size() >= n) break;
      if (seen.insert(fs.entity_id).second) out.push_back(fs);
    }
  }
  return out;
}

}  // namespace melkit
