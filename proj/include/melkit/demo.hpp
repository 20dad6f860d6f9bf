#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "melkit/augment.hpp"
#include "melkit/cache.hpp"
#include "melkit/config.hpp"
#include "melkit/eval.hpp"
#include "melkit/gateway.hpp"
#include "melkit/index.hpp"
#include "melkit/jsonl.hpp"
#include "melkit/retrieval.hpp"
#include "melkit/selection.hpp"
#include "melkit/types.hpp"
#include "melkit/util.hpp"

// Synthetic demo dataset and the offline end-to-end run. Entity names and
// token words are pseudowords built from a syllable table; each entity owns a
// syllable no other entity uses, so trigram embeddings separate cleanly and
// the gold entity always survives coarse matching and rerank. Mention names
// equal their gold entity's name, which the always-gold mock selection keys on.

namespace melkit {

namespace detail {

inline const std::vector<std::string>& demo_syllables() {
  static const std::vector<std::string> syl = [] {
    std::vector<std::string> out;
    const char* consonants = "bdklmnprstvz";
    const char* vowels = "aeiou";
    for (int c = 0; c < 12; ++c)
      for (int v = 0; v < 5; ++v)
        out.push_back(std::string(1, consonants[c]) + vowels[v]);
    return out;  // 60 distinct syllables
  }();
  return syl;
}

inline std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

// A tiny valid PNG (1x1 transparent pixel); the mock backend only hashes the
// bytes, so any well-formed image serves.
inline std::string demo_png_bytes() {
  static const std::string b64 =
      "iVBORw0KGgoAAAANSUhEUgAAAAEAAAABCAQAAAC1HAwCAAAAC0lEQVR42mNkYAAAAAYA"
      "AjCB0C8AAAAASUVORK5CYII=";
  return base64_decode(b64);
}

}  // namespace detail

inline Dataset generate_demo_dataset(std::size_t n_entities = 50,
                                     std::size_t n_mentions = 20,
                                     std::uint64_t seed = 42) {
  const auto& syl = detail::demo_syllables();
  Dataset ds;

  std::vector<std::string> names;
  std::vector<std::array<std::string, 3>> tokens;
  for (std::size_t j = 0; j < n_entities; ++j) {
    std::mt19937_64 rng(seed * 1000003 + j);
    auto pick = [&] { return syl[bounded_rand(rng, syl.size())]; };
    // The trailing syllable pair encodes j, so names are unique by construction
    // and every entity owns syllable syl[j % 60] that its tokens reuse.
    const std::string own = syl[j % syl.size()];
    const std::string high = syl[(j / syl.size()) % syl.size()];
    std::string name = detail::capitalize(pick() + pick()) + " " +
                       detail::capitalize(own + high + pick());
    std::array<std::string, 3> toks = {pick() + own + pick(), pick() + own + pick(),
                                       pick() + pick() + own};
    names.push_back(name);
    tokens.push_back(toks);

    Entity e;
    e.id = "E" + std::to_string(j);
    e.name = name;
    e.description = "The " + name + " is a " + toks[0] + " " + toks[1] +
                    " organization based in " + toks[2] + " that studies " +
                    toks[0] + " and " + toks[1] + ".";
    ds.entities.push_back(std::move(e));
  }

  for (std::size_t i = 0; i < n_mentions; ++i) {
    const std::size_t j = (i * 7 + 3) % n_entities;
    Mention m;
    m.id = "M" + std::to_string(i);
    m.name = names[j];
    m.context = "Seen near the " + tokens[j][0] + " " + tokens[j][1] +
                " offices during the " + tokens[j][2] + " gathering.";
    m.gold_entity_id = "E" + std::to_string(j);
    if (i < n_mentions / 2) m.image_ref = "images/m" + std::to_string(i) + ".png";
    if (i % 2 == 0) m.extra["category"] = "Organization";
    ds.mentions.push_back(std::move(m));
  }
  return ds;
}

inline void write_demo_files(const Dataset& ds, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  fs::create_directories(dir + "/images");
  save_entities(dir + "/entities.jsonl", ds.entities);
  save_mentions(dir + "/mentions.jsonl", ds.mentions);
  const std::string png = detail::demo_png_bytes();
  for (const auto& m : ds.mentions)
    if (m.image_ref) write_file(dir + "/" + *m.image_ref, png);
}

struct DemoOutcome {
  EvalReport report;
  PipelineConfig config;
};

// Generate, persist, augment, index, link and score — entirely offline.
inline DemoOutcome run_demo(const std::string& dir, std::uint64_t seed = 42,
                            MockMode mode = MockMode::always_gold,
                            unsigned jobs = 4) {
  Dataset ds = generate_demo_dataset(50, 20, seed);
  write_demo_files(ds, dir);

  PipelineConfig config;
  config.seed = seed;
  config.jobs = jobs;
  for (GatewayConfig* gw : {&config.llm, &config.mllm, &config.embedder}) {
    gw->backend = Backend::mock;
    gw->mock_seed = seed;
    gw->mock_mode = mode;
  }
  auto llm = make_gateway(config.llm);
  auto mllm = make_gateway(config.mllm);
  auto embedder = make_gateway(config.embedder);

  ReplyCache cache(dir + "/cache.jsonl");
  AugmentOptions aug;
  aug.jobs = jobs;
  std::vector<Entity> augmented =
      augment_entities(ds.entities, *llm, aug, &cache);
  save_entities(dir + "/entities.augmented.jsonl", augmented);

  VectorIndex index = build_index(augmented, *embedder, true, jobs);
  save_index(dir + "/index.melx", index);

  LinkOptions link_options;
  link_options.coarse_n = config.coarse_n;
  link_options.k = config.k;
  link_options.image_root = dir;
  Linker linker(augmented, &index, *llm, *mllm, *embedder, &cache, link_options);

  EvalOptions eval_options;
  eval_options.ks = config.ks;
  eval_options.jobs = jobs;
  eval_options.dataset_tag = "demo";
  eval_options.config_fingerprint = config_fingerprint(config);
  DemoOutcome outcome{evaluate(linker, ds.mentions, eval_options), config};
  write_file(dir + "/report.json", report_to_json(outcome.report).dump(2) + "\n");
  return outcome;
}

}  // namespace melkit
