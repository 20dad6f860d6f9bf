#pragma once

#include <charconv>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "melkit/augment.hpp"
#include "melkit/cache.hpp"
#include "melkit/errors.hpp"
#include "melkit/fuzzy.hpp"
#include "melkit/gateway.hpp"
#include "melkit/prompts.hpp"
#include "melkit/retrieval.hpp"
#include "melkit/types.hpp"
#include "melkit/util.hpp"

// Multi-choice selection: render the selection prompt over the candidate
// table, parse the model's JSON answer with a total fallback ladder
// (id -> exact name -> table head), and run the end-to-end link pipeline.

namespace melkit {

enum class Fallback { none, name_match, top1 };

inline std::string fallback_name(Fallback f) {
  switch (f) {
    case Fallback::none: return "none";
    case Fallback::name_match: return "name_match";
    case Fallback::top1: return "top1";
  }
  return "none";
}

struct SelectionResult {
  std::string mention_id;
  std::size_t chosen_index = 0;
  std::string chosen_entity_id;
  std::string raw_reply;
  Fallback fallback_used = Fallback::none;
};

// Per-mention outcome of the full pipeline. `entries` is the retrieval-scored
// candidate list; when selection ran, `chosen_index` points into it and the
// chosen entity occupies rank 0 of the effective ranking.
struct LinkResult {
  std::string mention_id;
  std::string predicted_entity_id;
  std::vector<ScoredEntity> entries;
  bool selection_used = false;
  std::size_t chosen_index = 0;
  Fallback fallback_used = Fallback::none;
};

namespace detail {

// Locate the first balanced JSON object in `text` that carries both an "id"
// and a "name" key, scanning left to right and ignoring braces inside strings.
inline std::optional<ojson> first_id_name_object(const std::string& text) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '{') continue;
    int depth = 0;
    bool in_string = false, escaped = false;
    for (std::size_t j = i; j < text.size(); ++j) {
      char c = text[j];
      if (in_string) {
        if (escaped)
          escaped = false;
        else if (c == '\\')
          escaped = true;
        else if (c == '"')
          in_string = false;
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}') {
        if (--depth == 0) {
          ojson obj = ojson::parse(text.substr(i, j - i + 1), nullptr, false);
          if (obj.is_object() && obj.contains("id") && obj.contains("name"))
            return obj;
          break;  // balanced but not the shape we want; try the next '{'
        }
      }
    }
  }
  return std::nullopt;
}

// "id" may arrive as a JSON integer or a decimal string.
inline std::optional<long> selection_index(const ojson& id_field) {
  if (id_field.is_number_integer()) return id_field.get<long>();
  if (!id_field.is_string()) return std::nullopt;
  std::string s = trim(id_field.get<std::string>());
  if (s.empty()) return std::nullopt;
  long value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

}  // namespace detail

inline SelectionResult parse_selection(const std::string& raw_reply,
                                       const std::vector<TableEntry>& candidates,
                                       const std::string& mention_id = "") {
  if (candidates.empty())
    throw Error(ErrorCode::empty_candidates,
                "cannot parse a selection over zero candidates", mention_id);
  if (is_blank(raw_reply))
    throw Error(ErrorCode::empty_reply, "model reply is blank", mention_id);

  SelectionResult result;
  result.mention_id = mention_id;
  result.raw_reply = raw_reply;

  auto obj = detail::first_id_name_object(raw_reply);
  if (obj) {
    if (auto idx = detail::selection_index((*obj)["id"]);
        idx && *idx >= 0 && static_cast<std::size_t>(*idx) < candidates.size()) {
      result.chosen_index = static_cast<std::size_t>(*idx);
      result.fallback_used = Fallback::none;
      result.chosen_entity_id = candidates[result.chosen_index].entity_id;
      return result;
    }
    if ((*obj)["name"].is_string()) {
      const std::string name = (*obj)["name"].get<std::string>();
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (candidates[i].name == name) {
          result.chosen_index = i;
          result.fallback_used = Fallback::name_match;
          result.chosen_entity_id = candidates[i].entity_id;
          return result;
        }
      }
    }
  }
  result.chosen_index = 0;
  result.fallback_used = Fallback::top1;
  result.chosen_entity_id = candidates[0].entity_id;
  return result;
}

// ---------------------------------------------------------------------------
// End-to-end link pipeline
// ---------------------------------------------------------------------------

struct LinkOptions {
  std::size_t coarse_n = 100;
  std::size_t k = 5;
  Ablation ablation = Ablation::none;
  bool restrict_to_coarse = true;  // rerank inside the coarse set vs the full KB
  std::string image_root;
};

class Linker {
 public:
  // `index` may be null only when the ablation disables embedding retrieval.
  Linker(const std::vector<Entity>& entities, const VectorIndex* index,
         Gateway& llm, Gateway& mllm, Gateway& embedder, ReplyCache* cache,
         LinkOptions options)
      : entities_(entities),
        index_(index),
        llm_(llm),
        mllm_(mllm),
        embedder_(embedder),
        cache_(cache),
        options_(options) {
    if (entities_.empty())
      throw Error(ErrorCode::empty_candidates, "knowledge base has no entities");
    if (options_.k == 0)
      throw Error(ErrorCode::precondition, "k must be >= 1");
    if (options_.coarse_n < options_.k)
      throw Error(ErrorCode::precondition, "coarse_n must be >= k");
    if (!ablates_retrieval(options_.ablation) && !index_)
      throw Error(ErrorCode::precondition,
                  "embedding retrieval needs a vector index");
    for (std::size_t i = 0; i < entities_.size(); ++i)
      by_id_[entities_[i].id] = i;
  }

  const Entity& entity(const std::string& id) const {
    auto it = by_id_.find(id);
    if (it == by_id_.end())
      throw Error(ErrorCode::unknown_entity_id,
                  "entity '" + id + "' not in the knowledge base", id);
    return entities_[it->second];
  }

  bool has_entity(const std::string& id) const { return by_id_.count(id) != 0; }

  std::vector<FuzzyScore> coarse(const Mention& mention) const {
    auto provided = mention.provided_candidates();
    if (!provided.empty())
      return seed_candidates(mention, provided, entities_, options_.coarse_n);
    return coarse_candidates(mention.name, entities_, options_.coarse_n);
  }

  // The candidate list the selection stage sees: embedding rerank of the
  // coarse set, or the head of the coarse set itself when retrieval is
  // ablated (fuzzy scores mapped to [0,1]).
  std::vector<ScoredEntity> candidates_for(const Mention& mention,
                                           Mention& augmented) const {
    augmented = prepared_mention(mention);
    std::vector<FuzzyScore> coarse_set = coarse(mention);
    if (ablates_retrieval(options_.ablation)) {
      std::vector<ScoredEntity> entries;
      for (const auto& fs : coarse_set) {
        if (entries.size() >= options_.k) break;
        entries.push_back({fs.entity_id, static_cast<float>(fs.score) / 100.0f});
      }
      return entries;
    }
    const std::string repr =
        mention_repr(augmented, ablates_mention_aug(options_.ablation));
    std::vector<std::vector<float>> embs = embedder_.embed({repr});
    std::optional<std::unordered_set<std::string>> restrict;
    if (options_.restrict_to_coarse) {
      restrict.emplace();
      for (const auto& fs : coarse_set) restrict->insert(fs.entity_id);
    }
    return retrieve_topk(embs[0], *index_, options_.k, restrict, mention.id)
        .entries;
  }

  std::vector<TableEntry> table_for(const std::vector<ScoredEntity>& entries) const {
    std::vector<TableEntry> table;
    table.reserve(entries.size());
    const bool use_summary = !ablates_entity_aug(options_.ablation);
    for (const auto& se : entries) {
      const Entity& e = entity(se.entity_id);
      if (use_summary && (!e.summary || e.summary->empty()))
        throw Error(ErrorCode::missing_summary,
                    "entity has no summary (run entity augmentation first)", e.id);
      table.push_back({e.id, e.name, use_summary ? *e.summary : e.description});
    }
    return table;
  }

  LinkResult link(const Mention& mention) const {
    Mention augmented = mention;
    std::vector<ScoredEntity> entries = candidates_for(mention, augmented);
    if (entries.empty())
      throw Error(ErrorCode::empty_candidates, "no candidates for mention",
                  mention.id);

    LinkResult result;
    result.mention_id = mention.id;
    result.entries = entries;
    if (ablates_selection(options_.ablation)) {
      result.predicted_entity_id = entries[0].entity_id;
      return result;
    }
    std::vector<TableEntry> table = table_for(entries);
    const std::string prompt = render_selection_prompt(augmented, table);
    ChatRequest req;
    req.user = prompt;
    SelectionResult sel = parse_selection(llm_.chat(req), table, mention.id);
    result.selection_used = true;
    result.chosen_index = sel.chosen_index;
    result.fallback_used = sel.fallback_used;
    result.predicted_entity_id = sel.chosen_entity_id;
    return result;
  }

  const LinkOptions& options() const { return options_; }
  const std::vector<Entity>& entities() const { return entities_; }

 private:
  // Mention augmentation happens lazily inside link; records that already
  // carry a description are reused as-is.
  Mention prepared_mention(const Mention& mention) const {
    if (ablates_mention_aug(options_.ablation)) {
      Mention m = mention;
      m.description.reset();
      return m;
    }
    if (mention.description && !mention.description->empty()) return mention;
    AugmentOptions opts;
    opts.use_visual = !ablates_visual(options_.ablation);
    opts.image_root = options_.image_root;
    return augment_mention(mention, mllm_, opts, cache_);
  }

  const std::vector<Entity>& entities_;
  const VectorIndex* index_;
  Gateway& llm_;
  Gateway& mllm_;
  Gateway& embedder_;
  ReplyCache* cache_;
  LinkOptions options_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

// ---------------------------------------------------------------------------
// Fine-tune export
// ---------------------------------------------------------------------------

struct FinetuneRecord {
  std::string instruction;
  std::string input;
  std::string output;
};

struct ExportStats {
  std::size_t exported = 0;
  std::size_t skipped_gold_missing = 0;  // gold fell outside the candidate set
  std::size_t skipped_no_gold = 0;       // mention carries no resolvable gold id
};

inline std::string gold_answer_json(std::size_t index, const std::string& name) {
  return "{\"id\": \"" + std::to_string(index) + "\", \"name\": " +
         ojson(name).dump() + "}";
}

// Deterministic sample: seeded shuffle, then the first n.
inline std::vector<Mention> sample_mentions(std::vector<Mention> mentions,
                                            std::size_t n, std::uint64_t seed) {
  deterministic_shuffle(mentions, seed);
  if (mentions.size() > n) mentions.resize(n);
  return mentions;
}

// One (instruction, input, output) triplet per mention whose candidate set
// contains the gold entity; instruction + "\n\n" + input reconstructs the full
// selection prompt byte-exactly.
inline std::vector<FinetuneRecord> export_finetune_dataset(
    const std::vector<Mention>& mentions, const Linker& linker,
    ExportStats& stats) {
  std::vector<FinetuneRecord> records;
  for (const auto& mention : mentions) {
    if (!mention.gold_entity_id || !linker.has_entity(*mention.gold_entity_id)) {
      ++stats.skipped_no_gold;
      continue;
    }
    Mention augmented = mention;
    std::vector<ScoredEntity> entries = linker.candidates_for(mention, augmented);
    long gold_index = -1;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (entries[i].entity_id == *mention.gold_entity_id) {
        gold_index = static_cast<long>(i);
        break;
      }
    }
    if (gold_index < 0) {
      ++stats.skipped_gold_missing;
      continue;
    }
    std::vector<TableEntry> table = linker.table_for(entries);
    const std::string prompt = render_selection_prompt(augmented, table);
    const std::string preamble = kSelectionPreamble;
    FinetuneRecord rec;
    rec.instruction = preamble;
    rec.input = prompt.substr(preamble.size() + 2);  // skip the blank line
    rec.output = gold_answer_json(static_cast<std::size_t>(gold_index),
                                  table[static_cast<std::size_t>(gold_index)].name);
    records.push_back(std::move(rec));
    ++stats.exported;
  }
  return records;
}

inline void save_finetune_records(const std::string& path,
                                  const std::vector<FinetuneRecord>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path, path);
  for (const auto& r : records) {
    ojson obj = ojson::object();
    obj["instruction"] = r.instruction;
    obj["input"] = r.input;
    obj["output"] = r.output;
    out << obj.dump() << '\n';
  }
}

}  // namespace melkit
