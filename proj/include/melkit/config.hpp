#pragma once

#include <charconv>
#include <cstdlib>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "melkit/errors.hpp"
#include "melkit/gateway.hpp"
#include "melkit/types.hpp"
#include "melkit/util.hpp"

// Layered pipeline configuration: defaults < config file < environment
// variables < command-line overrides. Keys are dotted lowercase names
// ("llm.backend"); the matching environment variable is the MELKIT_-prefixed
// upper-snake form ("MELKIT_LLM_BACKEND"). API keys never live in config
// values — only the *name* of the environment variable holding them does.

namespace melkit {

struct PipelineConfig {
  // Pipeline sections talk to real endpoints unless mock is asked for;
  // a bare GatewayConfig stays mock-first for offline construction.
  PipelineConfig() {
    for (GatewayConfig* gw : {&llm, &mllm, &embedder})
      gw->backend = Backend::http;
  }

  GatewayConfig llm;       // selection + entity summaries
  GatewayConfig mllm;      // mention augmentation (multimodal)
  GatewayConfig embedder;  // representation embeddings
  std::size_t coarse_n = 100;
  std::size_t k = 5;
  std::vector<std::size_t> ks = {1, 5, 10, 20};
  std::uint64_t seed = 42;
  Ablation ablation = Ablation::none;
  bool restrict_to_coarse = true;
  unsigned jobs = 4;
};

namespace detail {

inline long long parse_int(const std::string& key, const std::string& value) {
  long long out = 0;
  std::string v = trim(value);
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw Error(ErrorCode::bad_config,
                "'" + key + "' needs an integer, got '" + value + "'");
  return out;
}

inline long long parse_int_min(const std::string& key, const std::string& value,
                               long long min) {
  long long out = parse_int(key, value);
  if (out < min)
    throw Error(ErrorCode::bad_config,
                "'" + key + "' must be >= " + std::to_string(min));
  return out;
}

inline double parse_number(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    std::string v = trim(value);
    double out = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw Error(ErrorCode::bad_config,
                "'" + key + "' needs a number, got '" + value + "'");
  }
}

inline std::vector<std::size_t> parse_k_list(const std::string& key,
                                             const std::string& value) {
  std::vector<std::size_t> out;
  for (const auto& part : split_on(value, ',')) {
    if (trim(part).empty()) continue;
    out.push_back(static_cast<std::size_t>(parse_int_min(key, part, 1)));
  }
  if (out.empty())
    throw Error(ErrorCode::bad_config, "'" + key + "' needs at least one k");
  return out;
}

// Gateway keys shared by the llm./mllm./embedder. sections.
inline bool apply_gateway_key(GatewayConfig& gw, const std::string& full_key,
                              const std::string& sub, const std::string& value) {
  if (sub == "backend") {
    gw.backend = parse_backend(trim(value));
  } else if (sub == "endpoint") {
    gw.endpoint_url = trim(value);
  } else if (sub == "model") {
    gw.model_name = trim(value);
  } else if (sub == "api_key_env") {
    gw.api_key_env = trim(value);
  } else if (sub == "timeout_s") {
    gw.timeout_seconds = parse_number(full_key, value);
  } else if (sub == "max_inflight") {
    gw.max_inflight = static_cast<int>(parse_int_min(full_key, value, 1));
  } else if (sub == "max_retries") {
    gw.max_retries = static_cast<int>(parse_int_min(full_key, value, 0));
  } else if (sub == "backoff_ms") {
    gw.backoff_base_ms = static_cast<int>(parse_int_min(full_key, value, 0));
  } else if (sub == "embed_batch") {
    gw.embed_batch = static_cast<int>(parse_int_min(full_key, value, 1));
  } else if (sub == "mock_dim") {
    gw.mock_dim = static_cast<int>(parse_int_min(full_key, value, 1));
  } else if (sub == "mock_seed") {
    gw.mock_seed = static_cast<std::uint64_t>(parse_int_min(full_key, value, 0));
  } else if (sub == "mock_mode") {
    gw.mock_mode = parse_mock_mode(trim(value));
  } else {
    return false;
  }
  return true;
}

}  // namespace detail

inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out = {"coarse_n", "k",        "ks",  "seed",
                                    "ablation", "restrict", "jobs"};
    for (const char* section : {"llm", "mllm", "embedder"}) {
      for (const char* sub :
           {"backend", "endpoint", "model", "api_key_env", "timeout_s",
            "max_inflight", "max_retries", "backoff_ms", "embed_batch",
            "mock_dim", "mock_seed", "mock_mode"}) {
        out.push_back(std::string(section) + "." + sub);
      }
    }
    return out;
  }();
  return keys;
}

inline void apply_config_value(PipelineConfig& config, const std::string& key,
                               const std::string& value) {
  if (key == "coarse_n") {
    config.coarse_n = static_cast<std::size_t>(detail::parse_int_min(key, value, 1));
  } else if (key == "k") {
    config.k = static_cast<std::size_t>(detail::parse_int_min(key, value, 1));
  } else if (key == "ks") {
    config.ks = detail::parse_k_list(key, value);
  } else if (key == "seed") {
    config.seed = static_cast<std::uint64_t>(detail::parse_int_min(key, value, 0));
  } else if (key == "ablation") {
    config.ablation = parse_ablation(trim(value));
  } else if (key == "restrict") {
    std::string v = trim(value);
    if (v == "coarse")
      config.restrict_to_coarse = true;
    else if (v == "full")
      config.restrict_to_coarse = false;
    else
      throw Error(ErrorCode::bad_config,
                  "'restrict' must be 'coarse' or 'full', got '" + v + "'");
  } else if (key == "jobs") {
    config.jobs = static_cast<unsigned>(detail::parse_int_min(key, value, 1));
  } else {
    auto dot = key.find('.');
    if (dot != std::string::npos) {
      std::string section = key.substr(0, dot);
      std::string sub = key.substr(dot + 1);
      GatewayConfig* gw = section == "llm"        ? &config.llm
                          : section == "mllm"     ? &config.mllm
                          : section == "embedder" ? &config.embedder
                                                  : nullptr;
      if (gw && detail::apply_gateway_key(*gw, key, sub, value)) return;
    }
    throw Error(ErrorCode::bad_config, "unknown config key '" + key + "'");
  }
}

inline void validate_config(const PipelineConfig& config) {
  if (config.k < 1) throw Error(ErrorCode::bad_config, "k must be >= 1");
  if (config.coarse_n < config.k)
    throw Error(ErrorCode::bad_config, "coarse_n must be >= k");
}

// "key = value" lines; '#' starts a comment; blank lines ignored.
inline void apply_config_file(PipelineConfig& config, const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    if (is_blank(line)) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::bad_config,
                  path + ":" + std::to_string(lineno) + ": expected 'key = value'",
                  path, lineno);
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    try {
      apply_config_value(config, key, value);
    } catch (const Error& e) {
      throw Error(e.code(),
                  path + ":" + std::to_string(lineno) + ": " + e.message(), path,
                  lineno);
    }
  }
}

inline std::string env_var_for_key(const std::string& key) {
  std::string out = "MELKIT_";
  for (char c : key)
    out.push_back(c == '.' ? '_'
                           : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  return out;
}

inline void apply_environment(PipelineConfig& config) {
  for (const auto& key : config_keys()) {
    if (const char* v = std::getenv(env_var_for_key(key).c_str()); v && *v)
      apply_config_value(config, key, v);
  }
}

// Full layering: defaults, then file, then environment, then explicit
// overrides (command-line flags).
inline PipelineConfig load_config(
    const std::optional<std::string>& config_file,
    const std::vector<std::pair<std::string, std::string>>& overrides = {}) {
  PipelineConfig config;
  if (config_file) apply_config_file(config, *config_file);
  apply_environment(config);
  for (const auto& [key, value] : overrides) apply_config_value(config, key, value);
  validate_config(config);
  return config;
}

// Hash of exactly the fields that can change pipeline results — ablation,
// candidate counts, seeds and model identities — so reports carrying the same
// fingerprint are comparable. Paths, timeouts and parallelism are excluded.
inline std::string config_fingerprint(const PipelineConfig& config) {
  std::ostringstream s;
  s << "ablation=" << ablation_name(config.ablation) << '\n';
  s << "coarse_n=" << config.coarse_n << '\n';
  s << "k=" << config.k << '\n';
  s << "ks=";
  for (std::size_t i = 0; i < config.ks.size(); ++i)
    s << (i ? "," : "") << config.ks[i];
  s << '\n';
  s << "restrict=" << (config.restrict_to_coarse ? "coarse" : "full") << '\n';
  s << "seed=" << config.seed << '\n';
  const std::pair<const char*, const GatewayConfig*> sections[] = {
      {"llm", &config.llm}, {"mllm", &config.mllm}, {"embedder", &config.embedder}};
  for (const auto& [name, gw] : sections) {
    s << name << ".backend=" << backend_name(gw->backend) << '\n';
    s << name << ".model=" << gw->model_name << '\n';
    s << name << ".mock_dim=" << gw->mock_dim << '\n';
    s << name << ".mock_seed=" << gw->mock_seed << '\n';
    s << name << ".mock_mode=" << mock_mode_name(gw->mock_mode) << '\n';
  }
  return to_hex(fnv1a64(s.str()));
}

}  // namespace melkit
