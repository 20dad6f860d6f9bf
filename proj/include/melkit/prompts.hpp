#pragma once

#include <string>
#include <vector>

#include "melkit/errors.hpp"
#include "melkit/types.hpp"
#include "melkit/util.hpp"

// Prompt rendering. The three scaffolds below are frozen — golden tests pin
// their byte-exact output — so any edit here must update the fixtures too.
//
//   entity-summary prompt: one-sentence summary for an entity (name + description)
//   mention prompt:        image-grounded introduction of a mention
//   selection prompt:      multi-choice matching against an indexed entity table

namespace melkit {

struct MentionPrompt {
  std::string text;
  bool wants_image = false;
};

// One row of the selection prompt's entity table.
struct TableEntry {
  std::string entity_id;
  std::string name;
  std::string summary;
};

inline const char* kEntitySummaryScaffold =
    "Please generate a one-sentence summary for the given entity, including "
    "entity name and description.\n"
    "Entity name: {name}\n"
    "Entity description: {description}\n"
    "\n"
    "Try your best to summarize the main content of the given entity. And "
    "generate a short summary in 1 sentence.\n"
    "Summary:";

inline const char* kMentionScaffold =
    "The target entity named {name}.\n"
    "The image describes {context}\n"
    "Introduce the entity named {name}. Answer follow the format: \"The {name} "
    "refer to...\"\n"
    "Only generate an introduction to the target entity, not a description of "
    "the image.";

inline const char* kSelectionPreamble =
    "You are an expert in knowledge graph, and matching at top k specifically. "
    "Your task is to create matches between mention and entity tables to select "
    "the best-matched entity to match the given mention.";

inline const char* kSelectionFormatBlock =
    "Just give the most matched entity and do not give me any other "
    "information.\n"
    "Output a json following the format:\n"
    "```json\n"
    "{\n"
    "    \"id\": \"\",\n"
    "    \"name\": \"\"\n"
    "}\n"
    "```";

namespace detail {

inline std::string replace_all_slots(std::string text, const std::string& slot,
                                     const std::string& value) {
  std::size_t pos = 0;
  while ((pos = text.find(slot, pos)) != std::string::npos) {
    text.replace(pos, slot.size(), value);
    pos += value.size();
  }
  return text;
}

}  // namespace detail

inline std::string render_entity_summary_prompt(const Entity& entity) {
  if (entity.name.empty())
    throw Error(ErrorCode::precondition, "entity name must be non-empty",
                entity.id);
  std::string out = detail::replace_all_slots(kEntitySummaryScaffold, "{name}",
                                              entity.name);
  return detail::replace_all_slots(std::move(out), "{description}",
                                   entity.description);
}

inline MentionPrompt render_mention_prompt(const Mention& mention) {
  if (mention.name.empty())
    throw Error(ErrorCode::precondition, "mention name must be non-empty",
                mention.id);
  std::string out = detail::replace_all_slots(kMentionScaffold, "{name}",
                                              mention.name);
  out = detail::replace_all_slots(std::move(out), "{context}", mention.context);
  return {std::move(out), mention.image_ref.has_value()};
}

// The mention block used inside the selection prompt (between the preamble and
// the entity table). The Category line appears only when the record carries a
// category; the Description line is always present, empty when the mention has
// no description.
inline std::string render_mention_block(const Mention& mention) {
  std::string block = "### Mention\n";
  block += "Name: " + mention.name + "\n";
  block += "Context: " + mention.context + "\n";
  if (auto cat = mention.category()) block += "Category: " + *cat + "\n";
  block += "Description: " + mention.description.value_or("");
  return block;
}

// Entity table: one line per candidate in rank order, indexed from 0, with any
// newlines inside name or summary flattened so each candidate stays on one line.
inline std::string render_entity_table(const std::vector<TableEntry>& entries) {
  std::string table = "### Entity table";
  for (std::size_t i = 0; i < entries.size(); ++i) {
    table += "\n" + std::to_string(i) + ". " + flatten_newlines(entries[i].name) +
             ": " + flatten_newlines(entries[i].summary);
  }
  return table;
}

inline std::string render_selection_prompt(const Mention& mention,
                                           const std::vector<TableEntry>& entries) {
  if (entries.empty())
    throw Error(ErrorCode::empty_candidates,
                "selection prompt needs at least one candidate", mention.id);
  std::string out = kSelectionPreamble;
  out += "\n\n";
  out += render_mention_block(mention);
  out += "\n\n";
  out += render_entity_table(entries);
  out += "\n\n";
  out += kSelectionFormatBlock;
  return out;
}

// Stable identifiers for cache keys: hash of the scaffold text itself, so a
// scaffold edit invalidates cached model replies automatically.
inline std::string entity_summary_template_hash() {
  return hash8(kEntitySummaryScaffold, 0);
}
inline std::string mention_template_hash() { return hash8(kMentionScaffold, 0); }
inline std::string selection_template_hash() {
  return hash8(std::string(kSelectionPreamble) + "\n" + kSelectionFormatBlock, 0);
}

}  // namespace melkit
