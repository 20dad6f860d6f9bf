#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "melkit/errors.hpp"
#include "melkit/gateway.hpp"
#include "melkit/index.hpp"
#include "melkit/types.hpp"
#include "melkit/util.hpp"

// Embedding retrieval: textual representations for entities and mentions,
// cosine scoring against the vector index and Top-K candidate selection.

namespace melkit {

struct ScoredEntity {
  std::string entity_id;
  float score = 0.0f;
};

struct CandidateSet {
  std::string mention_id;
  std::vector<ScoredEntity> entries;  // sorted by score descending
  std::size_t k = 0;
};

// `<name>: <summary>` — the embedded text for an entity.
inline std::string entity_repr(const Entity& entity) {
  if (!entity.summary || entity.summary->empty())
    throw Error(ErrorCode::missing_summary,
                "entity has no summary (run entity augmentation first)", entity.id);
  return entity.name + ": " + *entity.summary;
}

// Raw-description variant used when entity augmentation is disabled.
inline std::string entity_repr_raw(const Entity& entity) {
  return entity.name + ": " + entity.description;
}

inline std::string entity_text(const Entity& entity, bool use_summary) {
  return use_summary ? entity_repr(entity) : entity_repr_raw(entity);
}

// `<name>: <context> <description>`; with mention augmentation disabled the
// description slot is dropped entirely: `<name>: <context>`.
inline std::string mention_repr(const Mention& mention,
                                bool ignore_description = false) {
  if (ignore_description) return mention.name + ": " + mention.context;
  if (!mention.description || mention.description->empty())
    throw Error(ErrorCode::missing_description,
                "mention has no description (run mention augmentation first)",
                mention.id);
  return mention.name + ": " + mention.context + " " + *mention.description;
}

inline double cosine_similarity(const std::vector<float>& u,
                                const std::vector<float>& v) {
  if (u.size() != v.size())
    throw Error(ErrorCode::dim_mismatch,
                "vectors of dim " + std::to_string(u.size()) + " vs " +
                    std::to_string(v.size()));
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += static_cast<double>(u[i]) * v[i];
    nu += static_cast<double>(u[i]) * u[i];
    nv += static_cast<double>(v[i]) * v[i];
  }
  if (nu == 0.0 || nv == 0.0)
    throw Error(ErrorCode::zero_vector, "cosine similarity of a zero vector");
  return dot / (std::sqrt(nu) * std::sqrt(nv));
}

inline void l2_normalize(std::vector<float>& v, const std::string& what) {
  double norm = 0.0;
  for (float x : v) norm += static_cast<double>(x) * x;
  norm = std::sqrt(norm);
  if (norm == 0.0) throw Error(ErrorCode::zero_vector, "zero embedding for " + what);
  for (auto& x : v) x = static_cast<float>(x / norm);
}

// Embed all entity representations and assemble the normalized index.
// Texts are chunked so several embedding requests can be in flight at once.
inline VectorIndex build_index(const std::vector<Entity>& entities,
                               Gateway& gateway, bool use_summary = true,
                               unsigned jobs = 4) {
  if (entities.empty())
    throw Error(ErrorCode::precondition, "cannot build an index of zero entities");
  std::vector<std::string> texts;
  texts.reserve(entities.size());
  for (const auto& e : entities) texts.push_back(entity_text(e, use_summary));

  const std::size_t chunk = 64;
  const std::size_t n_chunks = (texts.size() + chunk - 1) / chunk;
  auto chunks = parallel_map<std::vector<std::vector<float>>>(
      n_chunks, jobs, [&](std::size_t c) {
        std::size_t start = c * chunk;
        std::size_t count = std::min(chunk, texts.size() - start);
        std::vector<std::string> part(texts.begin() + start,
                                      texts.begin() + start + count);
        return gateway.embed(part);
      });

  VectorIndex index;
  index.model_tag = gateway.model_tag();
  index.ids.reserve(entities.size());
  for (const auto& e : entities) index.ids.push_back(e.id);
  for (std::size_t c = 0; c < chunks.size(); ++c) {
    for (std::size_t j = 0; j < chunks[c].size(); ++j) {
      auto& vec = chunks[c][j];
      if (index.dim == 0) {
        index.dim = static_cast<std::uint32_t>(vec.size());
        index.vectors.reserve(entities.size() * index.dim);
      }
      if (vec.size() != index.dim)
        throw Error(ErrorCode::dim_mismatch,
                    "embedding dim changed mid-build: " +
                        std::to_string(vec.size()) + " vs " +
                        std::to_string(index.dim));
      l2_normalize(vec, entities[c * chunk + j].id);
      index.vectors.insert(index.vectors.end(), vec.begin(), vec.end());
    }
  }
  validate_index(index, "build_index");
  return index;
}

// Exhaustive Top-K by dot product against the normalized rows. Ties break by
// entity id ascending. `restrict_to`, when present, filters which rows compete
// (scores are never rescaled by the restriction).
inline CandidateSet retrieve_topk(
    const std::vector<float>& mention_emb, const VectorIndex& index, std::size_t k,
    const std::optional<std::unordered_set<std::string>>& restrict_to = std::nullopt,
    const std::string& mention_id = "") {
  if (k == 0) throw Error(ErrorCode::precondition, "k must be >= 1");
  if (mention_emb.size() != index.dim)
    throw Error(ErrorCode::dim_mismatch,
                "query dim " + std::to_string(mention_emb.size()) +
                    " != index dim " + std::to_string(index.dim));
  if (restrict_to) {
    for (const auto& id : *restrict_to)
      if (index.find(id) < 0)
        throw Error(ErrorCode::unknown_entity_id,
                    "restriction id '" + id + "' not in index", id);
  }

  std::vector<float> query = mention_emb;
  l2_normalize(query, mention_id.empty() ? "query" : mention_id);

  std::vector<ScoredEntity> scored;
  scored.reserve(restrict_to ? restrict_to->size() : index.count());
  for (std::size_t i = 0; i < index.count(); ++i) {
    if (restrict_to && !restrict_to->count(index.ids[i])) continue;
    const float* r = index.row(i);
    double dot = 0.0;
    for (std::uint32_t d = 0; d < index.dim; ++d)
      dot += static_cast<double>(query[d]) * r[d];
    scored.push_back({index.ids[i], static_cast<float>(dot)});
  }
  std::sort(scored.begin(), scored.end(),
            [](const ScoredEntity& a, const ScoredEntity& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.entity_id < b.entity_id;
            });
  if (scored.size() > k) scored.resize(k);
  return {mention_id, std::move(scored), k};
}

}  // namespace melkit
