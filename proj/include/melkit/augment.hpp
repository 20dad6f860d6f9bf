#pragma once

#include <string>
#include <vector>

#include "melkit/cache.hpp"
#include "melkit/errors.hpp"
#include "melkit/gateway.hpp"
#include "melkit/prompts.hpp"
#include "melkit/types.hpp"
#include "melkit/util.hpp"

// Augmentation: attach a model-written summary to each entity and a
// model-written description to each mention (via the multimodal path when the
// mention carries an image). Replies are trimmed but otherwise verbatim.

namespace melkit {

struct AugmentOptions {
  bool skip_existing = false;  // leave already-augmented records untouched
  bool use_visual = true;      // false: text-only chat even when an image exists
  long limit = -1;             // max records to augment this run; <0 = all
  unsigned jobs = 4;
  std::string image_root;  // base directory for relative image refs
};

namespace detail {

inline std::string resolve_image_path(const std::string& ref,
                                      const std::string& root) {
  if (ref.empty() || ref.front() == '/' || root.empty()) return ref;
  return root + "/" + ref;
}

inline std::string read_image_bytes(const std::string& path) {
  try {
    std::string bytes = read_file(path);
    if (bytes.empty())
      throw Error(ErrorCode::image_unreadable, "image file is empty", path);
    return bytes;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::io_error)
      throw Error(ErrorCode::image_unreadable, "cannot read image " + path, path);
    throw;
  }
}

template <typename Fn>
auto with_record_context(const std::string& id, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.context().empty())
      throw Error(e.code(), e.message(), id, e.line());
    throw;
  }
}

}  // namespace detail

inline Entity augment_entity(Entity entity, Gateway& gateway,
                             ReplyCache* cache = nullptr) {
  return detail::with_record_context(entity.id, [&] {
    const std::string prompt = render_entity_summary_prompt(entity);
    const std::string tmpl = entity_summary_template_hash();
    std::string reply;
    if (cache) {
      if (auto hit = cache->get(entity.id, tmpl, gateway.model_tag())) {
        reply = *hit;
      }
    }
    if (reply.empty()) {
      ChatRequest req;
      req.user = prompt;
      reply = trim(gateway.chat(req));
      if (reply.empty())
        throw Error(ErrorCode::empty_augmentation,
                    "model returned a blank entity summary", entity.id);
      if (cache) cache->put(entity.id, tmpl, gateway.model_tag(), reply);
    }
    entity.summary = reply;
    return entity;
  });
}

inline Mention augment_mention(Mention mention, Gateway& gateway,
                               const AugmentOptions& options = {},
                               ReplyCache* cache = nullptr) {
  return detail::with_record_context(mention.id, [&] {
    MentionPrompt prompt = render_mention_prompt(mention);
    const std::string tmpl = mention_template_hash();
    const bool visual = prompt.wants_image && options.use_visual;
    // The cache key distinguishes the visual and text-only paths.
    const std::string tag = gateway.model_tag() + (visual ? "+v" : "");
    std::string reply;
    if (cache) {
      if (auto hit = cache->get(mention.id, tmpl, tag)) reply = *hit;
    }
    if (reply.empty()) {
      ChatRequest req;
      req.user = prompt.text;
      if (visual) {
        std::string path =
            detail::resolve_image_path(*mention.image_ref, options.image_root);
        req.image = detail::read_image_bytes(path);
        req.image_media = image_media_from_path(path);
        reply = trim(gateway.chat_multimodal(req));
      } else {
        reply = trim(gateway.chat(req));
      }
      if (reply.empty())
        throw Error(ErrorCode::empty_augmentation,
                    "model returned a blank mention description", mention.id);
      if (cache) cache->put(mention.id, tmpl, tag, reply);
    }
    mention.description = reply;
    return mention;
  });
}

namespace detail {

// Shared batch driver: pick the indices to process, run them in parallel,
// merge results back at their original positions.
template <typename Record, typename Fn>
std::vector<Record> augment_batch(std::vector<Record> records, bool skip,
                                  long limit, unsigned jobs, Fn&& one,
                                  bool (*has_output)(const Record&)) {
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (skip && has_output(records[i])) continue;
    if (limit >= 0 && todo.size() >= static_cast<std::size_t>(limit)) break;
    todo.push_back(i);
  }
  std::vector<Record> done = parallel_map<Record>(
      todo.size(), jobs, [&](std::size_t k) { return one(records[todo[k]]); });
  for (std::size_t k = 0; k < todo.size(); ++k)
    records[todo[k]] = std::move(done[k]);
  return records;
}

}  // namespace detail

inline std::vector<Entity> augment_entities(std::vector<Entity> entities,
                                            Gateway& gateway,
                                            const AugmentOptions& options = {},
                                            ReplyCache* cache = nullptr) {
  return detail::augment_batch<Entity>(
      std::move(entities), options.skip_existing, options.limit, options.jobs,
      [&](const Entity& e) { return augment_entity(e, gateway, cache); },
      [](const Entity& e) { return e.summary.has_value(); });
}

inline std::vector<Mention> augment_mentions(std::vector<Mention> mentions,
                                             Gateway& gateway,
                                             const AugmentOptions& options = {},
                                             ReplyCache* cache = nullptr) {
  return detail::augment_batch<Mention>(
      std::move(mentions), options.skip_existing, options.limit, options.jobs,
      [&](const Mention& m) { return augment_mention(m, gateway, options, cache); },
      [](const Mention& m) { return m.description.has_value(); });
}

}  // namespace melkit
