#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "melkit/errors.hpp"
#include "melkit/types.hpp"
#include "melkit/util.hpp"

// Deterministic train/val/test splitting of mentions.
//
// Mention ids are shuffled with a seeded Fisher-Yates permutation, then sizes
// are assigned by flooring count*ratio for each split and giving every
// leftover item to train. The same (ids, ratios, seed) triple always produces
// the same labels on any platform.

namespace melkit {

struct SplitRatios {
  double train = 0.7;
  double val = 0.1;
  double test = 0.2;
};

inline void validate_ratios(const SplitRatios& r) {
  if (r.train < 0.0 || r.val < 0.0 || r.test < 0.0)
    throw Error(ErrorCode::bad_ratios, "split ratios must be non-negative");
  double sum = r.train + r.val + r.test;
  if (std::fabs(sum - 1.0) > 1e-9)
    throw Error(ErrorCode::bad_ratios,
                "split ratios must sum to 1 (got " + std::to_string(sum) + ")");
}

inline SplitLabels split_dataset(const std::vector<Mention>& mentions,
                                 const SplitRatios& ratios, std::uint64_t seed) {
  validate_ratios(ratios);
  std::vector<std::string> ids;
  ids.reserve(mentions.size());
  for (const auto& m : mentions) ids.push_back(m.id);
  deterministic_shuffle(ids, seed);

  const std::size_t n = ids.size();
  std::size_t n_val = static_cast<std::size_t>(std::floor(ratios.val * n));
  std::size_t n_test = static_cast<std::size_t>(std::floor(ratios.test * n));
  // Leftovers from flooring go to train.
  std::size_t n_train = n - n_val - n_test;

  SplitLabels labels;
  std::size_t i = 0;
  for (; i < n_train; ++i) labels[ids[i]] = Split::train;
  for (; i < n_train + n_val; ++i) labels[ids[i]] = Split::val;
  for (; i < n; ++i) labels[ids[i]] = Split::test;
  return labels;
}

inline std::vector<Mention> filter_split(const std::vector<Mention>& mentions,
                                         const SplitLabels& labels, Split which) {
  std::vector<Mention> out;
  for (const auto& m : mentions) {
    auto it = labels.find(m.id);
    if (it != labels.end() && it->second == which) out.push_back(m);
  }
  return out;
}

}  // namespace melkit
