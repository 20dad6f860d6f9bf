#pragma once

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "melkit/errors.hpp"

namespace melkit {

using ojson = nlohmann::ordered_json;

// KB record. `summary` is absent until entity augmentation runs.
// `extra` preserves unknown JSONL keys across load/save.
struct Entity {
  std::string id;
  std::string name;
  std::string description;
  std::optional<std::string> image_ref;
  std::optional<std::string> summary;
  ojson extra = ojson::object();
};

// Query record. `description` is absent until mention augmentation runs.
struct Mention {
  std::string id;
  std::string name;
  std::string context;
  std::optional<std::string> image_ref;
  std::optional<std::string> gold_entity_id;
  std::optional<std::string> description;
  ojson extra = ojson::object();

  // Optional extras the pipeline recognizes when datasets carry them.
  std::optional<std::string> category() const {
    auto it = extra.find("category");
    if (it != extra.end() && it->is_string()) return it->get<std::string>();
    return std::nullopt;
  }
  std::vector<std::string> provided_candidates() const {
    std::vector<std::string> out;
    auto it = extra.find("candidates");
    if (it != extra.end() && it->is_array()) {
      for (const auto& v : *it) {
        if (v.is_string()) out.push_back(v.get<std::string>());
      }
    }
    return out;
  }
};

enum class Split { train, val, test };

inline const char* split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

inline Split parse_split(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "val") return Split::val;
  if (s == "test") return Split::test;
  throw Error(ErrorCode::bad_splits, "unknown split label '" + s + "'", s);
}

using SplitLabels = std::map<std::string, Split>;

// Table 7 stage toggles. `none` is the full pipeline.
enum class Ablation {
  none,
  selection,          // w/o multi-choice selection: rerank Top-1 is the answer
  retrieval,          // w/o retrieval augmentation: fuzzy ranking only
  entity_aug,         // w/o entity augmentation: raw descriptions everywhere
  mention_aug,        // w/o mention augmentation: name+context only
  em_aug,             // both of the above
  visual,             // w/o visual information: text-only mention augmentation
  visual_selection,   // visual + selection combined
};

inline const char* ablation_name(Ablation a) {
  switch (a) {
    case Ablation::none: return "none";
    case Ablation::selection: return "selection";
    case Ablation::retrieval: return "retrieval";
    case Ablation::entity_aug: return "entity-aug";
    case Ablation::mention_aug: return "mention-aug";
    case Ablation::em_aug: return "em-aug";
    case Ablation::visual: return "visual";
    case Ablation::visual_selection: return "visual-selection";
  }
  return "?";
}

inline Ablation parse_ablation(const std::string& s) {
  for (Ablation a : {Ablation::none, Ablation::selection, Ablation::retrieval,
                     Ablation::entity_aug, Ablation::mention_aug, Ablation::em_aug,
                     Ablation::visual, Ablation::visual_selection}) {
    if (s == ablation_name(a)) return a;
  }
  throw Error(ErrorCode::bad_config, "unknown ablation '" + s + "'", s);
}

inline bool ablates_selection(Ablation a) {
  return a == Ablation::selection || a == Ablation::visual_selection;
}
inline bool ablates_retrieval(Ablation a) { return a == Ablation::retrieval; }
inline bool ablates_entity_aug(Ablation a) {
  return a == Ablation::entity_aug || a == Ablation::em_aug;
}
inline bool ablates_mention_aug(Ablation a) {
  return a == Ablation::mention_aug || a == Ablation::em_aug;
}
inline bool ablates_visual(Ablation a) {
  return a == Ablation::visual || a == Ablation::visual_selection;
}

// Immutable after load; shared read-only across pipeline stages.
struct Dataset {
  std::vector<Entity> entities;
  std::vector<Mention> mentions;
  std::optional<SplitLabels> split_labels;

  std::unordered_map<std::string, size_t> entity_index() const {
    std::unordered_map<std::string, size_t> idx;
    idx.reserve(entities.size());
    for (size_t i = 0; i < entities.size(); ++i) idx.emplace(entities[i].id, i);
    return idx;
  }

  const Entity* find_entity(const std::string& id) const {
    for (const auto& e : entities) {
      if (e.id == id) return &e;
    }
    return nullptr;
  }
};

}  // namespace melkit
