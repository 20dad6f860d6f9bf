#pragma once

#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "melkit/errors.hpp"
#include "melkit/selection.hpp"
#include "melkit/types.hpp"
#include "melkit/util.hpp"

// Top-k accuracy per the strict-inequality rank rule: a mention counts as
// correct at k when fewer than k candidates score strictly higher than its
// gold entity — ties never count against the gold. When the selection stage
// ran, the chosen entity occupies rank 0 and the rest keep retrieval order.

namespace melkit {

// Effective rank of the gold entity inside a link result; nullopt when the
// gold is not in the candidate list (counted incorrect at every k).
inline std::optional<std::size_t> gold_rank(const LinkResult& result,
                                            const std::string& gold_id) {
  long gold_pos = -1;
  for (std::size_t i = 0; i < result.entries.size(); ++i) {
    if (result.entries[i].entity_id == gold_id) {
      gold_pos = static_cast<long>(i);
      break;
    }
  }
  if (gold_pos < 0) return std::nullopt;
  const float gold_score = result.entries[static_cast<std::size_t>(gold_pos)].score;

  if (!result.selection_used) {
    std::size_t rank = 0;
    for (const auto& e : result.entries)
      if (e.score > gold_score) ++rank;
    return rank;
  }
  // Selection puts its choice at rank 0; everything else follows in
  // retrieval-score order behind it.
  if (result.chosen_index == static_cast<std::size_t>(gold_pos)) return 0;
  std::size_t rank = 1;
  for (std::size_t i = 0; i < result.entries.size(); ++i) {
    if (i == result.chosen_index) continue;
    if (result.entries[i].score > gold_score) ++rank;
  }
  return rank;
}

inline double topk_accuracy(
    const std::vector<LinkResult>& results,
    const std::unordered_map<std::string, std::string>& golds, std::size_t k) {
  if (results.empty())
    throw Error(ErrorCode::empty_split, "no results to score");
  if (k == 0) throw Error(ErrorCode::precondition, "k must be >= 1");
  std::size_t correct = 0;
  for (const auto& r : results) {
    auto it = golds.find(r.mention_id);
    if (it == golds.end())
      throw Error(ErrorCode::misaligned_ids,
                  "no gold id for mention '" + r.mention_id + "'", r.mention_id);
    auto rank = gold_rank(r, it->second);
    if (rank && *rank < k) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(results.size());
}

struct EvalOptions {
  std::vector<std::size_t> ks = {1, 5, 10, 20};
  unsigned jobs = 4;
  std::string dataset_tag;
  std::string config_fingerprint;
};

struct EvalReport {
  std::string dataset_tag;
  std::size_t n_mentions = 0;  // mentions actually scored (D)
  std::map<std::size_t, double> topk;
  std::map<std::string, double> fallback_rates;  // over selection-backed mentions
  std::size_t skipped_unresolvable_gold = 0;
  std::size_t failed_mentions = 0;  // per-mention errors, tallied incorrect
  std::string config_fingerprint;
};

inline EvalReport evaluate(const Linker& linker,
                           const std::vector<Mention>& mentions,
                           const EvalOptions& options = {}) {
  if (mentions.empty())
    throw Error(ErrorCode::empty_split, "evaluation split is empty");

  EvalReport report;
  report.dataset_tag = options.dataset_tag;
  report.config_fingerprint = options.config_fingerprint;

  // Mentions whose gold id is absent or unresolvable are excluded up front
  // and reported, mirroring the removal of unlinkable mentions.
  std::vector<Mention> usable;
  for (const auto& m : mentions) {
    if (!m.gold_entity_id || !linker.has_entity(*m.gold_entity_id)) {
      ++report.skipped_unresolvable_gold;
      continue;
    }
    usable.push_back(m);
  }
  if (usable.empty())
    throw Error(ErrorCode::empty_split,
                "no evaluable mentions (all golds unresolvable)");

  struct Outcome {
    LinkResult result;
    bool failed = false;
  };
  std::vector<Outcome> outcomes = parallel_map<Outcome>(
      usable.size(), options.jobs, [&](std::size_t i) {
        Outcome o;
        try {
          o.result = linker.link(usable[i]);
        } catch (const Error&) {
          // A failed mention scores incorrect at every k but never aborts
          // the run; an empty candidate list yields exactly that.
          o.result.mention_id = usable[i].id;
          o.failed = true;
        }
        return o;
      });

  std::unordered_map<std::string, std::string> golds;
  std::vector<LinkResult> results;
  results.reserve(outcomes.size());
  std::map<std::string, std::size_t> fallback_counts;
  std::size_t selection_backed = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i].failed) ++report.failed_mentions;
    golds[usable[i].id] = *usable[i].gold_entity_id;
    if (outcomes[i].result.selection_used) {
      ++selection_backed;
      ++fallback_counts[fallback_name(outcomes[i].result.fallback_used)];
    }
    results.push_back(std::move(outcomes[i].result));
  }

  report.n_mentions = results.size();
  for (std::size_t k : options.ks) report.topk[k] = topk_accuracy(results, golds, k);
  if (selection_backed > 0) {
    for (const auto& [name, count] : fallback_counts)
      report.fallback_rates[name] =
          static_cast<double>(count) / static_cast<double>(selection_backed);
  }
  return report;
}

inline ojson report_to_json(const EvalReport& report) {
  ojson obj = ojson::object();
  obj["dataset"] = report.dataset_tag;
  obj["n_mentions"] = report.n_mentions;
  obj["topk"] = ojson::object();
  for (const auto& [k, acc] : report.topk)
    obj["topk"]["top" + std::to_string(k)] = acc;
  obj["fallback_rates"] = ojson::object();
  for (const auto& [name, rate] : report.fallback_rates)
    obj["fallback_rates"][name] = rate;
  obj["skipped_unresolvable_gold"] = report.skipped_unresolvable_gold;
  obj["failed_mentions"] = report.failed_mentions;
  obj["config_fingerprint"] = report.config_fingerprint;
  return obj;
}

// Fixed-width accuracy table, one row per dataset tag.
inline std::string report_table(const EvalReport& report) {
  std::ostringstream out;
  out << std::left << std::setw(24)
      << (report.dataset_tag.empty() ? "dataset" : report.dataset_tag);
  for (const auto& [k, acc] : report.topk) {
    std::ostringstream head;
    head << "Top-" << k;
    out << std::right << std::setw(10) << head.str();
  }
  out << "\n" << std::left << std::setw(24) << "accuracy";
  out << std::fixed << std::setprecision(4);
  for (const auto& [k, acc] : report.topk) out << std::right << std::setw(10) << acc;
  out << "\n";
  return out.str();
}

}  // namespace melkit
