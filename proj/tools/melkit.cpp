// melkit — multimodal entity-linking pipeline CLI.
//
// Subcommands: ingest, augment-entities, augment-mentions, build-index,
// retrieve, link, export-finetune, evaluate, demo.
// Exit codes: 0 success, 1 domain error, 2 usage error.

#include <iostream>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>

#include "melkit/melkit.hpp"

namespace {

using melkit::Error;
using melkit::ErrorCode;

// Options shared by every subcommand: config file, generic key=value
// overrides, and named shorthands for the common pipeline knobs. Named flags
// are applied after --set pairs, so they win.
struct CommonOpts {
  std::string config_file;
  std::vector<std::string> sets;
  std::optional<long> coarse_n;
  std::optional<long> k;
  std::optional<std::string> ks;
  std::optional<std::string> ablate;
  std::optional<std::string> restrict_mode;
  std::optional<long> seed;
  std::optional<long> jobs;
  std::optional<std::string> mock_mode;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_file, "Config file (key = value lines)");
    cmd->add_option("--set", sets, "Override a config key, e.g. --set llm.mock_seed=7")
        ->take_all();
    cmd->add_option("--coarse-n", coarse_n, "Coarse candidate count (default 100)");
    cmd->add_option("--k", k, "Candidates kept after rerank (default 5)");
    cmd->add_option("--ks", ks, "Comma-separated accuracy cutoffs (default 1,5,10,20)");
    cmd->add_option("--ablate", ablate,
                    "Disable a stage: none|selection|retrieval|entity-aug|"
                    "mention-aug|em-aug|visual|visual-selection");
    cmd->add_option("--restrict", restrict_mode,
                    "Rerank pool: coarse (default) or full");
    cmd->add_option("--seed", seed, "Deterministic seed (default 42)");
    cmd->add_option("--jobs", jobs, "Worker threads (default 4)");
    cmd->add_option("--mock-mode", mock_mode,
                    "Mock backend behavior: hash-choice or always-gold");
  }

  melkit::PipelineConfig build() const {
    std::vector<std::pair<std::string, std::string>> overrides;
    for (const auto& kv : sets) {
      auto eq = kv.find('=');
      if (eq == std::string::npos)
        throw Error(ErrorCode::bad_config, "--set expects key=value, got '" + kv + "'");
      overrides.emplace_back(melkit::trim(kv.substr(0, eq)),
                             melkit::trim(kv.substr(eq + 1)));
    }
    if (coarse_n) overrides.emplace_back("coarse_n", std::to_string(*coarse_n));
    if (k) overrides.emplace_back("k", std::to_string(*k));
    if (ks) overrides.emplace_back("ks", *ks);
    if (ablate) overrides.emplace_back("ablation", *ablate);
    if (restrict_mode) overrides.emplace_back("restrict", *restrict_mode);
    if (seed) overrides.emplace_back("seed", std::to_string(*seed));
    if (jobs) overrides.emplace_back("jobs", std::to_string(*jobs));
    if (mock_mode) {
      overrides.emplace_back("llm.mock_mode", *mock_mode);
      overrides.emplace_back("mllm.mock_mode", *mock_mode);
      overrides.emplace_back("embedder.mock_mode", *mock_mode);
    }
    return melkit::load_config(
        config_file.empty() ? std::nullopt : std::make_optional(config_file),
        overrides);
  }
};

melkit::SplitRatios parse_ratios(const std::string& text) {
  auto parts = melkit::split_on(text, ',');
  if (parts.size() != 3)
    throw Error(ErrorCode::bad_ratios, "--ratios expects three numbers, e.g. 0.7,0.1,0.2");
  melkit::SplitRatios r;
  try {
    r.train = std::stod(parts[0]);
    r.val = std::stod(parts[1]);
    r.test = std::stod(parts[2]);
  } catch (const std::exception&) {
    throw Error(ErrorCode::bad_ratios, "--ratios expects three numbers");
  }
  return r;
}

std::vector<melkit::Mention> select_split(const std::vector<melkit::Mention>& mentions,
                                          const std::string& splits_file,
                                          const std::string& split_name) {
  if (split_name.empty() || split_name == "all") return mentions;
  if (splits_file.empty())
    throw Error(ErrorCode::bad_splits,
                "--split " + split_name + " needs --splits <file>");
  melkit::SplitLabels labels = melkit::load_split_labels(splits_file, mentions);
  return melkit::filter_split(mentions, labels, melkit::parse_split(split_name));
}

struct GatewaySet {
  std::unique_ptr<melkit::Gateway> llm, mllm, embedder;
  explicit GatewaySet(const melkit::PipelineConfig& config)
      : llm(melkit::make_gateway(config.llm)),
        mllm(melkit::make_gateway(config.mllm)),
        embedder(melkit::make_gateway(config.embedder)) {}
};

melkit::LinkOptions link_options_from(const melkit::PipelineConfig& config,
                                      const std::string& image_root) {
  melkit::LinkOptions o;
  o.coarse_n = config.coarse_n;
  o.k = config.k;
  o.ablation = config.ablation;
  o.restrict_to_coarse = config.restrict_to_coarse;
  o.image_root = image_root;
  return o;
}

// ---------------------------------------------------------------------------
// Subcommand bodies
// ---------------------------------------------------------------------------

int cmd_ingest(const std::string& entities_path, const std::string& mentions_path,
               const std::string& out_entities, const std::string& out_mentions,
               const std::string& splits_out, const std::string& ratios_text,
               bool filter_unresolvable, const CommonOpts& common) {
  auto config = common.build();
  auto entities = melkit::load_entities(entities_path);
  std::cout << "entities: " << entities.size() << " loaded\n";
  std::vector<melkit::Mention> mentions;
  if (!mentions_path.empty()) {
    mentions = melkit::load_mentions(mentions_path);
    std::cout << "mentions: " << mentions.size() << " loaded\n";
    if (filter_unresolvable) {
      std::unordered_map<std::string, bool> known;
      for (const auto& e : entities) known[e.id] = true;
      std::vector<melkit::Mention> kept;
      for (auto& m : mentions)
        if (m.gold_entity_id && known.count(*m.gold_entity_id))
          kept.push_back(std::move(m));
      std::cout << "filtered " << (mentions.size() - kept.size())
                << " mentions with unresolvable gold ids\n";
      mentions = std::move(kept);
    }
  }
  if (!out_entities.empty()) melkit::save_entities(out_entities, entities);
  if (!out_mentions.empty()) melkit::save_mentions(out_mentions, mentions);
  if (!splits_out.empty()) {
    auto ratios = ratios_text.empty() ? melkit::SplitRatios{}
                                      : parse_ratios(ratios_text);
    auto labels = melkit::split_dataset(mentions, ratios, config.seed);
    melkit::save_split_labels(splits_out, labels);
    std::size_t n_train = 0, n_val = 0, n_test = 0;
    for (const auto& [_, s] : labels) {
      if (s == melkit::Split::train) ++n_train;
      else if (s == melkit::Split::val) ++n_val;
      else ++n_test;
    }
    std::cout << "splits: " << n_train << " train, " << n_val << " val, "
              << n_test << " test -> " << splits_out << "\n";
  }
  return 0;
}

int cmd_augment_entities(const std::string& in, const std::string& out,
                         const std::string& cache_path, bool skip_existing,
                         long limit, const CommonOpts& common) {
  auto config = common.build();
  auto entities = melkit::load_entities(in);
  auto gateway = melkit::make_gateway(config.llm);
  melkit::ReplyCache cache(cache_path);
  melkit::AugmentOptions options;
  options.skip_existing = skip_existing;
  options.limit = limit;
  options.jobs = config.jobs;
  entities = melkit::augment_entities(entities, *gateway, options,
                                      cache_path.empty() ? nullptr : &cache);
  melkit::save_entities(out, entities);
  auto t = gateway->telemetry();
  std::cout << "augmented " << entities.size() << " entities -> " << out
            << " (requests " << t.requests << ", retries " << t.retries << ")\n";
  return 0;
}

int cmd_augment_mentions(const std::string& in, const std::string& out,
                         const std::string& cache_path, const std::string& image_root,
                         bool skip_existing, bool no_visual, long limit,
                         const CommonOpts& common) {
  auto config = common.build();
  auto mentions = melkit::load_mentions(in);
  auto gateway = melkit::make_gateway(config.mllm);
  melkit::ReplyCache cache(cache_path);
  melkit::AugmentOptions options;
  options.skip_existing = skip_existing;
  options.use_visual = !no_visual && !melkit::ablates_visual(config.ablation);
  options.limit = limit;
  options.jobs = config.jobs;
  options.image_root = image_root;
  mentions = melkit::augment_mentions(mentions, *gateway, options,
                                      cache_path.empty() ? nullptr : &cache);
  melkit::save_mentions(out, mentions);
  auto t = gateway->telemetry();
  std::cout << "augmented " << mentions.size() << " mentions -> " << out
            << " (requests " << t.requests << ", retries " << t.retries << ")\n";
  return 0;
}

int cmd_build_index(const std::string& entities_path, const std::string& out,
                    const CommonOpts& common) {
  auto config = common.build();
  auto entities = melkit::load_entities(entities_path);
  auto gateway = melkit::make_gateway(config.embedder);
  const bool use_summary = !melkit::ablates_entity_aug(config.ablation);
  melkit::VectorIndex index =
      melkit::build_index(entities, *gateway, use_summary, config.jobs);
  melkit::save_index(out, index);
  std::cout << "index: " << index.count() << " rows, dim " << index.dim
            << ", model " << index.model_tag << " -> " << out << "\n";
  return 0;
}

int cmd_retrieve(const std::string& entities_path, const std::string& mentions_path,
                 const std::string& index_path, const std::string& mention_id,
                 const std::string& cache_path, const std::string& image_root,
                 const std::string& out, const CommonOpts& common) {
  auto config = common.build();
  auto entities = melkit::load_entities(entities_path);
  auto mentions = melkit::load_mentions(mentions_path);
  melkit::VectorIndex index = melkit::load_index(index_path);
  GatewaySet gw(config);
  melkit::ReplyCache cache(cache_path);
  melkit::Linker linker(entities, &index, *gw.llm, *gw.mllm, *gw.embedder,
                        cache_path.empty() ? nullptr : &cache,
                        link_options_from(config, image_root));
  std::ostringstream lines;
  for (const auto& m : mentions) {
    if (!mention_id.empty() && m.id != mention_id) continue;
    melkit::Mention augmented = m;
    auto entries = linker.candidates_for(m, augmented);
    melkit::ojson obj = melkit::ojson::object();
    obj["mention_id"] = m.id;
    obj["candidates"] = melkit::ojson::array();
    for (const auto& se : entries) {
      melkit::ojson c = melkit::ojson::object();
      c["entity_id"] = se.entity_id;
      c["score"] = se.score;
      obj["candidates"].push_back(c);
    }
    lines << obj.dump() << "\n";
  }
  if (out.empty())
    std::cout << lines.str();
  else
    melkit::write_file(out, lines.str());
  return 0;
}

int cmd_link(const std::string& entities_path, const std::string& mentions_path,
             const std::string& index_path, const std::string& mention_id,
             const std::string& cache_path, const std::string& image_root,
             const std::string& out, const CommonOpts& common) {
  auto config = common.build();
  auto entities = melkit::load_entities(entities_path);
  auto mentions = melkit::load_mentions(mentions_path);
  melkit::VectorIndex index;
  const bool need_index = !melkit::ablates_retrieval(config.ablation);
  if (need_index) index = melkit::load_index(index_path);
  GatewaySet gw(config);
  melkit::ReplyCache cache(cache_path);
  melkit::Linker linker(entities, need_index ? &index : nullptr, *gw.llm,
                        *gw.mllm, *gw.embedder,
                        cache_path.empty() ? nullptr : &cache,
                        link_options_from(config, image_root));
  std::ostringstream lines;
  for (const auto& m : mentions) {
    if (!mention_id.empty() && m.id != mention_id) continue;
    melkit::LinkResult r = linker.link(m);
    melkit::ojson obj = melkit::ojson::object();
    obj["mention_id"] = r.mention_id;
    obj["predicted_entity_id"] = r.predicted_entity_id;
    obj["selection_used"] = r.selection_used;
    if (r.selection_used) {
      obj["chosen_index"] = r.chosen_index;
      obj["fallback"] = melkit::fallback_name(r.fallback_used);
    }
    obj["candidates"] = melkit::ojson::array();
    for (const auto& se : r.entries) {
      melkit::ojson c = melkit::ojson::object();
      c["entity_id"] = se.entity_id;
      c["score"] = se.score;
      obj["candidates"].push_back(c);
    }
    lines << obj.dump() << "\n";
  }
  if (out.empty())
    std::cout << lines.str();
  else
    melkit::write_file(out, lines.str());
  return 0;
}

int cmd_export_finetune(const std::string& entities_path,
                        const std::string& mentions_path,
                        const std::string& index_path, const std::string& out,
                        const std::string& splits_file, const std::string& split,
                        const std::string& cache_path, const std::string& image_root,
                        long sample, const CommonOpts& common) {
  auto config = common.build();
  auto entities = melkit::load_entities(entities_path);
  auto mentions = melkit::load_mentions(mentions_path);
  mentions = select_split(mentions, splits_file, split);
  if (sample >= 0)
    mentions = melkit::sample_mentions(std::move(mentions),
                                       static_cast<std::size_t>(sample), config.seed);
  melkit::VectorIndex index;
  const bool need_index = !melkit::ablates_retrieval(config.ablation);
  if (need_index) index = melkit::load_index(index_path);
  GatewaySet gw(config);
  melkit::ReplyCache cache(cache_path);
  melkit::Linker linker(entities, need_index ? &index : nullptr, *gw.llm,
                        *gw.mllm, *gw.embedder,
                        cache_path.empty() ? nullptr : &cache,
                        link_options_from(config, image_root));
  melkit::ExportStats stats;
  auto records = melkit::export_finetune_dataset(mentions, linker, stats);
  melkit::save_finetune_records(out, records);
  std::cout << "exported " << stats.exported << " triplets -> " << out
            << " (skipped: " << stats.skipped_gold_missing
            << " gold outside candidates, " << stats.skipped_no_gold
            << " without resolvable gold)\n";
  return 0;
}

int cmd_evaluate(const std::string& entities_path, const std::string& mentions_path,
                 const std::string& index_path, const std::string& splits_file,
                 const std::string& split, const std::string& cache_path,
                 const std::string& image_root, const std::string& report_path,
                 const CommonOpts& common) {
  auto config = common.build();
  auto entities = melkit::load_entities(entities_path);
  auto mentions = melkit::load_mentions(mentions_path);
  mentions = select_split(mentions, splits_file, split);
  melkit::VectorIndex index;
  const bool need_index = !melkit::ablates_retrieval(config.ablation);
  if (need_index) index = melkit::load_index(index_path);
  GatewaySet gw(config);
  melkit::ReplyCache cache(cache_path);
  melkit::Linker linker(entities, need_index ? &index : nullptr, *gw.llm,
                        *gw.mllm, *gw.embedder,
                        cache_path.empty() ? nullptr : &cache,
                        link_options_from(config, image_root));
  melkit::EvalOptions options;
  options.ks = config.ks;
  options.jobs = config.jobs;
  options.dataset_tag = mentions_path;
  options.config_fingerprint = melkit::config_fingerprint(config);
  melkit::EvalReport report = melkit::evaluate(linker, mentions, options);
  std::cout << melkit::report_table(report);
  std::cout << "fingerprint: " << report.config_fingerprint << "\n";
  if (!report_path.empty())
    melkit::write_file(report_path,
                       melkit::report_to_json(report).dump(2) + "\n");
  return 0;
}

int cmd_demo(const std::string& dir, const CommonOpts& common) {
  auto config = common.build();
  melkit::MockMode mode = config.llm.mock_mode;
  melkit::DemoOutcome outcome =
      melkit::run_demo(dir, config.seed, mode, config.jobs);
  std::cout << melkit::report_table(outcome.report);
  std::cout << "mode: " << melkit::mock_mode_name(mode)
            << "  fingerprint: " << outcome.report.config_fingerprint << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"melkit: multimodal entity-linking pipeline"};
  app.require_subcommand(1);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Validate and normalize JSONL datasets");
  std::string in_entities, in_mentions, out_entities, out_mentions, splits_out,
      ratios_text;
  bool filter_unresolvable = false;
  CommonOpts ingest_common;
  ingest->add_option("--entities", in_entities, "Entity JSONL")->required();
  ingest->add_option("--mentions", in_mentions, "Mention JSONL");
  ingest->add_option("--out-entities", out_entities, "Normalized entity output");
  ingest->add_option("--out-mentions", out_mentions, "Normalized mention output");
  ingest->add_option("--splits-out", splits_out, "Write train/val/test labels here");
  ingest->add_option("--ratios", ratios_text, "Split ratios (default 0.7,0.1,0.2)");
  ingest->add_flag("--filter-unresolvable-gold", filter_unresolvable,
                   "Drop mentions whose gold id is missing from the KB");
  ingest_common.attach(ingest);

  // augment-entities
  auto* aug_e = app.add_subcommand("augment-entities", "Attach model summaries to entities");
  std::string ae_in, ae_out, ae_cache;
  bool ae_skip = false;
  long ae_limit = -1;
  CommonOpts ae_common;
  aug_e->add_option("--entities", ae_in, "Entity JSONL")->required();
  aug_e->add_option("--out", ae_out, "Augmented output")->required();
  aug_e->add_option("--cache", ae_cache, "Reply cache file");
  aug_e->add_flag("--skip-existing", ae_skip, "Leave summarized entities untouched");
  aug_e->add_option("--limit", ae_limit, "Max records to augment this run");
  ae_common.attach(aug_e);

  // augment-mentions
  auto* aug_m = app.add_subcommand("augment-mentions", "Attach model descriptions to mentions");
  std::string am_in, am_out, am_cache, am_image_root;
  bool am_skip = false, am_no_visual = false;
  long am_limit = -1;
  CommonOpts am_common;
  aug_m->add_option("--mentions", am_in, "Mention JSONL")->required();
  aug_m->add_option("--out", am_out, "Augmented output")->required();
  aug_m->add_option("--cache", am_cache, "Reply cache file");
  aug_m->add_option("--image-root", am_image_root, "Base dir for relative image refs");
  aug_m->add_flag("--skip-existing", am_skip, "Leave described mentions untouched");
  aug_m->add_flag("--no-visual", am_no_visual, "Text-only chat even when images exist");
  aug_m->add_option("--limit", am_limit, "Max records to augment this run");
  am_common.attach(aug_m);

  // build-index
  auto* build = app.add_subcommand("build-index", "Embed entity representations");
  std::string bi_in, bi_out;
  CommonOpts bi_common;
  build->add_option("--entities", bi_in, "Augmented entity JSONL")->required();
  build->add_option("--out", bi_out, "Index file")->required();
  bi_common.attach(build);

  // retrieve
  auto* retrieve = app.add_subcommand("retrieve", "Coarse + embedding candidate retrieval");
  std::string rt_entities, rt_mentions, rt_index, rt_mention_id, rt_cache,
      rt_image_root, rt_out;
  CommonOpts rt_common;
  retrieve->add_option("--entities", rt_entities, "Entity JSONL")->required();
  retrieve->add_option("--mentions", rt_mentions, "Mention JSONL")->required();
  retrieve->add_option("--index", rt_index, "Vector index")->required();
  retrieve->add_option("--mention-id", rt_mention_id, "Only this mention");
  retrieve->add_option("--cache", rt_cache, "Reply cache file");
  retrieve->add_option("--image-root", rt_image_root, "Base dir for image refs");
  retrieve->add_option("--out", rt_out, "Write JSONL here instead of stdout");
  rt_common.attach(retrieve);

  // link
  auto* link = app.add_subcommand("link", "Full pipeline: retrieve + select");
  std::string lk_entities, lk_mentions, lk_index, lk_mention_id, lk_cache,
      lk_image_root, lk_out;
  CommonOpts lk_common;
  link->add_option("--entities", lk_entities, "Entity JSONL")->required();
  link->add_option("--mentions", lk_mentions, "Mention JSONL")->required();
  link->add_option("--index", lk_index, "Vector index");
  link->add_option("--mention-id", lk_mention_id, "Only this mention");
  link->add_option("--cache", lk_cache, "Reply cache file");
  link->add_option("--image-root", lk_image_root, "Base dir for image refs");
  link->add_option("--out", lk_out, "Write JSONL here instead of stdout");
  lk_common.attach(link);

  // export-finetune
  auto* exp = app.add_subcommand("export-finetune", "Write instruction-tuning triplets");
  std::string ex_entities, ex_mentions, ex_index, ex_out, ex_splits, ex_split,
      ex_cache, ex_image_root;
  long ex_sample = -1;
  CommonOpts ex_common;
  exp->add_option("--entities", ex_entities, "Entity JSONL")->required();
  exp->add_option("--mentions", ex_mentions, "Mention JSONL")->required();
  exp->add_option("--index", ex_index, "Vector index");
  exp->add_option("--out", ex_out, "Output JSONL")->required();
  exp->add_option("--splits", ex_splits, "Split labels file");
  exp->add_option("--split", ex_split, "Which split to export (default all)");
  exp->add_option("--sample", ex_sample, "Deterministic sample size");
  exp->add_option("--cache", ex_cache, "Reply cache file");
  exp->add_option("--image-root", ex_image_root, "Base dir for image refs");
  ex_common.attach(exp);

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Top-k accuracy over a split");
  std::string ev_entities, ev_mentions, ev_index, ev_splits, ev_split = "all",
                                                             ev_cache, ev_image_root,
                                                             ev_report;
  CommonOpts ev_common;
  eval->add_option("--entities", ev_entities, "Entity JSONL")->required();
  eval->add_option("--mentions", ev_mentions, "Mention JSONL")->required();
  eval->add_option("--index", ev_index, "Vector index");
  eval->add_option("--splits", ev_splits, "Split labels file");
  eval->add_option("--split", ev_split, "train|val|test|all (default all)");
  eval->add_option("--cache", ev_cache, "Reply cache file");
  eval->add_option("--image-root", ev_image_root, "Base dir for image refs");
  eval->add_option("--report", ev_report, "Write report JSON here");
  ev_common.attach(eval);

  // demo
  auto* demo = app.add_subcommand("demo", "Offline end-to-end run on synthetic data");
  std::string demo_dir = "demo_run";
  CommonOpts demo_common;
  demo->add_option("--dir", demo_dir, "Working directory (default demo_run)");
  demo_common.attach(demo);
  // The demo defaults to the always-gold mock so the pipeline's happy path
  // is visible; --mock-mode hash-choice exercises the adversarial path.
  demo_common.mock_mode = std::string("always-gold");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (ingest->parsed())
      return cmd_ingest(in_entities, in_mentions, out_entities, out_mentions,
                        splits_out, ratios_text, filter_unresolvable, ingest_common);
    if (aug_e->parsed())
      return cmd_augment_entities(ae_in, ae_out, ae_cache, ae_skip, ae_limit,
                                  ae_common);
    if (aug_m->parsed())
      return cmd_augment_mentions(am_in, am_out, am_cache, am_image_root, am_skip,
                                  am_no_visual, am_limit, am_common);
    if (build->parsed()) return cmd_build_index(bi_in, bi_out, bi_common);
    if (retrieve->parsed())
      return cmd_retrieve(rt_entities, rt_mentions, rt_index, rt_mention_id,
                          rt_cache, rt_image_root, rt_out, rt_common);
    if (link->parsed())
      return cmd_link(lk_entities, lk_mentions, lk_index, lk_mention_id, lk_cache,
                      lk_image_root, lk_out, lk_common);
    if (exp->parsed())
      return cmd_export_finetune(ex_entities, ex_mentions, ex_index, ex_out,
                                 ex_splits, ex_split, ex_cache, ex_image_root,
                                 ex_sample, ex_common);
    if (eval->parsed())
      return cmd_evaluate(ev_entities, ev_mentions, ev_index, ev_splits, ev_split,
                          ev_cache, ev_image_root, ev_report, ev_common);
    if (demo->parsed()) return cmd_demo(demo_dir, demo_common);
    std::cerr << "no subcommand selected\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::bad_config || e.code() == ErrorCode::bad_ratios
               ? 2
               : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
