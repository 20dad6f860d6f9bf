#pragma once

#include <fstream>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "melkit/errors.hpp"
#include "melkit/types.hpp"
#include "melkit/util.hpp"

// JSONL ingestion and persistence for Entity / Mention records.
//
// One UTF-8 JSON object per line. Canonical key order on save:
//   entity:  id, name, description, image_ref, summary
//   mention: id, name, context, image_ref, gold_entity_id, description
// Missing optional keys are omitted, never null. Unknown keys are preserved
// (sorted) after the canonical ones and ignored by the pipeline.

namespace melkit {

namespace detail {

inline std::string require_string(const ojson& obj, const char* key, long line) {
  auto it = obj.find(key);
  if (it == obj.end())
    throw Error(ErrorCode::missing_field, std::string("missing '") + key + "'",
                key, line);
  if (!it->is_string())
    throw Error(ErrorCode::malformed_line,
                std::string("'") + key + "' must be a string", key, line);
  return it->get<std::string>();
}

inline std::optional<std::string> optional_string(const ojson& obj, const char* key,
                                                  long line, bool reject_empty) {
  auto it = obj.find(key);
  if (it == obj.end()) return std::nullopt;
  if (it->is_null())
    throw Error(ErrorCode::malformed_line,
                std::string("'") + key + "' must be omitted, not null", key, line);
  if (!it->is_string())
    throw Error(ErrorCode::malformed_line,
                std::string("'") + key + "' must be a string", key, line);
  auto v = it->get<std::string>();
  if (reject_empty && v.empty())
    throw Error(ErrorCode::missing_field,
                std::string("'") + key + "' present but empty", key, line);
  return v;
}

inline ojson collect_extras(const ojson& obj,
                            const std::vector<std::string>& known) {
  // Sorted so save output is canonical regardless of input order.
  std::set<std::string> keys;
  for (auto it = obj.begin(); it != obj.end(); ++it) keys.insert(it.key());
  ojson extra = ojson::object();
  for (const auto& k : keys) {
    if (std::find(known.begin(), known.end(), k) == known.end()) {
      extra[k] = obj.at(k);
    }
  }
  return extra;
}

template <typename Fn>
void for_each_jsonl_line(const std::string& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path, path);
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ojson obj;
    try {
      obj = ojson::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::malformed_line,
                  "line " + std::to_string(lineno) + ": " + e.what(), path, lineno);
    }
    if (!obj.is_object())
      throw Error(ErrorCode::malformed_line,
                  "line " + std::to_string(lineno) + ": not a JSON object", path,
                  lineno);
    fn(obj, lineno);
  }
}

}  // namespace detail

inline Entity parse_entity(const ojson& obj, long line = -1) {
  Entity e;
  e.id = detail::require_string(obj, "id", line);
  e.name = detail::require_string(obj, "name", line);
  e.description = detail::require_string(obj, "description", line);
  e.image_ref = detail::optional_string(obj, "image_ref", line, false);
  e.summary = detail::optional_string(obj, "summary", line, true);
  if (e.id.empty())
    throw Error(ErrorCode::missing_field, "'id' present but empty", "id", line);
  if (trim(e.name).empty())
    throw Error(ErrorCode::missing_field, "'name' empty after trimming", "name",
                line);
  e.extra = detail::collect_extras(obj, {"id", "name", "description", "image_ref",
                                         "summary"});
  return e;
}

inline Mention parse_mention(const ojson& obj, long line = -1) {
  Mention m;
  m.id = detail::require_string(obj, "id", line);
  m.name = detail::require_string(obj, "name", line);
  m.context = detail::require_string(obj, "context", line);
  m.image_ref = detail::optional_string(obj, "image_ref", line, false);
  m.gold_entity_id = detail::optional_string(obj, "gold_entity_id", line, false);
  m.description = detail::optional_string(obj, "description", line, true);
  if (m.id.empty())
    throw Error(ErrorCode::missing_field, "'id' present but empty", "id", line);
  if (trim(m.name).empty())
    throw Error(ErrorCode::missing_field, "'name' empty after trimming", "name",
                line);
  m.extra = detail::collect_extras(obj, {"id", "name", "context", "image_ref",
                                         "gold_entity_id", "description"});
  return m;
}

inline ojson entity_to_json(const Entity& e) {
  ojson obj = ojson::object();
  obj["id"] = e.id;
  obj["name"] = e.name;
  obj["description"] = e.description;
  if (e.image_ref) obj["image_ref"] = *e.image_ref;
  if (e.summary) obj["summary"] = *e.summary;
  for (auto it = e.extra.begin(); it != e.extra.end(); ++it) obj[it.key()] = *it;
  return obj;
}

inline ojson mention_to_json(const Mention& m) {
  ojson obj = ojson::object();
  obj["id"] = m.id;
  obj["name"] = m.name;
  obj["context"] = m.context;
  if (m.image_ref) obj["image_ref"] = *m.image_ref;
  if (m.gold_entity_id) obj["gold_entity_id"] = *m.gold_entity_id;
  if (m.description) obj["description"] = *m.description;
  for (auto it = m.extra.begin(); it != m.extra.end(); ++it) obj[it.key()] = *it;
  return obj;
}

inline std::vector<Entity> load_entities(const std::string& path) {
  std::vector<Entity> out;
  std::unordered_set<std::string> ids;
  detail::for_each_jsonl_line(path, [&](const ojson& obj, long lineno) {
    Entity e = parse_entity(obj, lineno);
    if (!ids.insert(e.id).second)
      throw Error(ErrorCode::duplicate_id, "duplicate entity id '" + e.id + "'",
                  e.id, lineno);
    out.push_back(std::move(e));
  });
  return out;
}

inline std::vector<Mention> load_mentions(const std::string& path) {
  std::vector<Mention> out;
  std::unordered_set<std::string> ids;
  detail::for_each_jsonl_line(path, [&](const ojson& obj, long lineno) {
    Mention m = parse_mention(obj, lineno);
    if (!ids.insert(m.id).second)
      throw Error(ErrorCode::duplicate_id, "duplicate mention id '" + m.id + "'",
                  m.id, lineno);
    out.push_back(std::move(m));
  });
  return out;
}

inline void save_entities(const std::string& path, const std::vector<Entity>& es) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path, path);
  for (const auto& e : es) out << entity_to_json(e).dump() << '\n';
}

inline void save_mentions(const std::string& path, const std::vector<Mention>& ms) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path, path);
  for (const auto& m : ms) out << mention_to_json(m).dump() << '\n';
}

// Split labels are stored as a single JSON object {mention_id: "train"|...}.
inline void save_split_labels(const std::string& path, const SplitLabels& labels) {
  ojson obj = ojson::object();
  for (const auto& [id, s] : labels) obj[id] = split_name(s);
  write_file(path, obj.dump(2) + "\n");
}

inline SplitLabels load_split_labels(const std::string& path,
                                     const std::vector<Mention>& mentions) {
  ojson obj;
  try {
    obj = ojson::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::bad_splits, std::string("cannot parse ") + path + ": " +
                                           e.what(),
                path);
  }
  if (!obj.is_object())
    throw Error(ErrorCode::bad_splits, path + " is not a JSON object", path);
  SplitLabels labels;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!it->is_string())
      throw Error(ErrorCode::bad_splits, "label for '" + it.key() + "' not a string",
                  it.key());
    labels[it.key()] = parse_split(it->get<std::string>());
  }
  // Labels must partition the mention ids exactly.
  std::unordered_set<std::string> mention_ids;
  for (const auto& m : mentions) mention_ids.insert(m.id);
  for (const auto& [id, _] : labels) {
    if (!mention_ids.count(id))
      throw Error(ErrorCode::bad_splits, "label for unknown mention '" + id + "'",
                  id);
  }
  for (const auto& id : mention_ids) {
    if (!labels.count(id))
      throw Error(ErrorCode::bad_splits, "mention '" + id + "' has no split label",
                  id);
  }
  return labels;
}

}  // namespace melkit
