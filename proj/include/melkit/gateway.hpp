#pragma once

#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "melkit/errors.hpp"
#include "melkit/prompts.hpp"
#include "melkit/types.hpp"
#include "melkit/util.hpp"

// Model gateway: uniform access to text chat, multimodal chat and text
// embeddings over the OpenAI-compatible wire protocol, plus a deterministic
// offline mock backend whose replies are a pure function of (input bytes, seed).

namespace melkit {

enum class ImageMedia { png, jpeg };

inline const char* image_media_mime(ImageMedia m) {
  return m == ImageMedia::png ? "image/png" : "image/jpeg";
}

inline ImageMedia image_media_from_path(const std::string& path) {
  auto dot = path.find_last_of('.');
  std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == "png") return ImageMedia::png;
  if (ext == "jpg" || ext == "jpeg") return ImageMedia::jpeg;
  throw Error(ErrorCode::unsupported_media_type,
              "unsupported image type '." + ext + "' (png/jpeg only)", path);
}

struct ChatRequest {
  std::optional<std::string> system;
  std::string user;
  std::optional<std::string> image;  // raw bytes
  ImageMedia image_media = ImageMedia::png;
  double temperature = 0.0;  // deliberate default; overriding warns on stderr
  int max_tokens = 1024;
};

enum class Backend { http, mock };
enum class MockMode { hash_choice, always_gold };

inline std::string backend_name(Backend b) { return b == Backend::http ? "http" : "mock"; }
inline Backend parse_backend(const std::string& s) {
  if (s == "http") return Backend::http;
  if (s == "mock") return Backend::mock;
  throw Error(ErrorCode::bad_config, "unknown backend '" + s + "' (http|mock)");
}

inline std::string mock_mode_name(MockMode m) {
  return m == MockMode::hash_choice ? "hash-choice" : "always-gold";
}
inline MockMode parse_mock_mode(const std::string& s) {
  if (s == "hash-choice") return MockMode::hash_choice;
  if (s == "always-gold") return MockMode::always_gold;
  throw Error(ErrorCode::bad_config,
              "unknown mock mode '" + s + "' (hash-choice|always-gold)");
}

struct GatewayConfig {
  Backend backend = Backend::mock;
  std::string endpoint_url = "http://localhost:8080/v1";
  std::string model_name = "mock-model";
  std::string api_key_env = "MELKIT_API_KEY";
  double timeout_seconds = 60.0;
  int max_inflight = 4;
  int max_retries = 3;
  int backoff_base_ms = 250;
  int embed_batch = 64;
  // Mock-only knobs.
  int mock_dim = 256;
  std::uint64_t mock_seed = 0;
  MockMode mock_mode = MockMode::hash_choice;
};

struct TelemetrySnapshot {
  long requests = 0;
  long retries = 0;
  long failures = 0;
  long tokens = 0;
};

class Gateway {
 public:
  virtual ~Gateway() = default;

  virtual std::string chat(const ChatRequest& request) = 0;
  virtual std::string chat_multimodal(const ChatRequest& request) = 0;
  virtual std::vector<std::vector<float>> embed(const std::vector<std::string>& texts) = 0;

  TelemetrySnapshot telemetry() const {
    return {requests_.load(), retries_.load(), failures_.load(), tokens_.load()};
  }

  virtual std::string model_tag() const = 0;

 protected:
  void warn_if_temperature_overridden(const ChatRequest& r) {
    if (r.temperature != 0.0 && !temperature_warned_.exchange(true))
      std::cerr << "warning: temperature " << r.temperature
                << " overrides the default of 0\n";
  }
  void check_chat_preconditions(const ChatRequest& r, bool multimodal) {
    if (!multimodal && r.image)
      throw Error(ErrorCode::precondition, "plain chat cannot carry an image");
    if (multimodal) {
      if (!r.image) throw Error(ErrorCode::precondition, "multimodal chat needs an image");
      if (r.image->empty())
        throw Error(ErrorCode::precondition, "image bytes must be non-empty");
    }
    if (r.temperature < 0.0)
      throw Error(ErrorCode::precondition, "temperature must be >= 0");
    if (r.max_tokens <= 0)
      throw Error(ErrorCode::precondition, "max_tokens must be positive");
    warn_if_temperature_overridden(r);
  }
  void check_embed_preconditions(const std::vector<std::string>& texts) {
    if (texts.empty())
      throw Error(ErrorCode::precondition, "embed input list must be non-empty");
    for (std::size_t i = 0; i < texts.size(); ++i)
      if (texts[i].empty())
        throw Error(ErrorCode::precondition,
                    "embed input " + std::to_string(i) + " is empty");
  }

  std::atomic<long> requests_{0};
  std::atomic<long> retries_{0};
  std::atomic<long> failures_{0};
  std::atomic<long> tokens_{0};
  std::atomic<bool> temperature_warned_{false};
};

// ---------------------------------------------------------------------------
// Mock backend
// ---------------------------------------------------------------------------

namespace detail {

// Extract the "### Mention" block and the entity-table candidate names from a
// rendered selection prompt. Returns false when the prompt does not carry the
// expected structure.
struct ParsedSelectionPrompt {
  std::string mention_block;   // from "### Mention" up to the blank line before the table
  std::string mention_name;    // value of the "Name:" line
  std::vector<std::string> candidate_names;
};

inline bool parse_selection_prompt(const std::string& text,
                                   ParsedSelectionPrompt& out) {
  const std::string mention_marker = "### Mention\n";
  const std::string table_marker = "### Entity table";
  auto mpos = text.find(mention_marker);
  auto tpos = text.find(table_marker);
  if (mpos == std::string::npos || tpos == std::string::npos || tpos < mpos)
    return false;
  std::string block = text.substr(mpos, tpos - mpos);
  while (!block.empty() && block.back() == '\n') block.pop_back();
  out.mention_block = block;

  const std::string name_marker = "Name: ";
  auto npos = block.find(name_marker);
  if (npos == std::string::npos) return false;
  auto nend = block.find('\n', npos);
  out.mention_name = block.substr(npos + name_marker.size(),
                                  nend == std::string::npos
                                      ? std::string::npos
                                      : nend - npos - name_marker.size());

  // Table rows run from the line after the marker to the next blank line.
  auto row_start = text.find('\n', tpos);
  if (row_start == std::string::npos) return false;
  ++row_start;
  auto table_end = text.find("\n\n", row_start);
  std::string rows = text.substr(row_start, table_end == std::string::npos
                                                ? std::string::npos
                                                : table_end - row_start);
  for (const auto& line : split_on(rows, '\n')) {
    auto dot = line.find(". ");
    if (dot == std::string::npos) continue;
    auto colon = line.find(": ", dot + 2);
    std::string name = colon == std::string::npos
                           ? line.substr(dot + 2)
                           : line.substr(dot + 2, colon - dot - 2);
    out.candidate_names.push_back(name);
  }
  return !out.candidate_names.empty();
}

}  // namespace detail

// Offline backend with deterministic replies:
//   - entity-summary prompts  -> "SUMMARY(<hash8 of name>): <first 12 words of description>"
//   - mention prompts         -> "The <name> refer to MOCK-<hash8 of text+image>."
//   - selection prompts       -> fenced JSON picking hash(mention block) % count,
//                                or the name-matching candidate in always-gold mode
//   - anything else           -> "MOCK-REPLY-<hash8 of text>"
// Embeddings hash character trigrams into `mock_dim` buckets, L2-normalized.
class MockGateway : public Gateway {
 public:
  explicit MockGateway(GatewayConfig config) : config_(std::move(config)) {}

  std::string chat(const ChatRequest& request) override {
    check_chat_preconditions(request, false);
    requests_.fetch_add(1);
    return reply_for(request);
  }

  std::string chat_multimodal(const ChatRequest& request) override {
    check_chat_preconditions(request, true);
    requests_.fetch_add(1);
    return reply_for(request);
  }

  std::vector<std::vector<float>> embed(const std::vector<std::string>& texts) override {
    check_embed_preconditions(texts);
    requests_.fetch_add(1);
    std::vector<std::vector<float>> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed_one(t));
    return out;
  }

  std::string model_tag() const override {
    return "mock/" + std::to_string(config_.mock_dim) + "/" +
           std::to_string(config_.mock_seed);
  }

 private:
  std::string digest(const std::string& payload) const {
    return hash8(payload, config_.mock_seed);
  }

  std::string reply_for(const ChatRequest& r) const {
    const std::string& text = r.user;
    if (text.rfind("Please generate a one-sentence summary", 0) == 0)
      return entity_summary_reply(text);
    if (text.rfind("The target entity named ", 0) == 0)
      return mention_reply(r);
    detail::ParsedSelectionPrompt sel;
    if (text.rfind(kSelectionPreamble, 0) == 0 &&
        detail::parse_selection_prompt(text, sel))
      return selection_reply(sel);
    return "MOCK-REPLY-" + digest(text);
  }

  std::string entity_summary_reply(const std::string& text) const {
    std::string name, description;
    const std::string name_marker = "Entity name: ";
    const std::string desc_marker = "Entity description: ";
    auto npos = text.find(name_marker);
    if (npos != std::string::npos) {
      auto nend = text.find('\n', npos);
      name = text.substr(npos + name_marker.size(),
                         nend == std::string::npos ? std::string::npos
                                                   : nend - npos - name_marker.size());
    }
    auto dpos = text.find(desc_marker);
    if (dpos != std::string::npos) {
      auto dend = text.find("\n\nTry your best", dpos);
      description = text.substr(dpos + desc_marker.size(),
                                dend == std::string::npos
                                    ? std::string::npos
                                    : dend - dpos - desc_marker.size());
    }
    return "SUMMARY(" + digest(name) + "): " + first_n_words(description, 12);
  }

  std::string mention_reply(const ChatRequest& r) const {
    // First line is "The target entity named <name>."
    auto line_end = r.user.find('\n');
    std::string first = r.user.substr(0, line_end);
    const std::string prefix = "The target entity named ";
    std::string name = first.substr(prefix.size());
    if (!name.empty() && name.back() == '.') name.pop_back();
    std::string payload = r.user;
    if (r.image) payload += *r.image;
    return "The " + name + " refer to MOCK-" + digest(payload) + ".";
  }

  std::string selection_reply(const detail::ParsedSelectionPrompt& sel) const {
    std::size_t idx = 0;
    bool picked = false;
    if (config_.mock_mode == MockMode::always_gold) {
      for (std::size_t i = 0; i < sel.candidate_names.size(); ++i) {
        if (sel.candidate_names[i] == sel.mention_name) {
          idx = i;
          picked = true;
          break;
        }
      }
    }
    if (!picked)
      idx = static_cast<std::size_t>(
          fnv1a64_seeded(sel.mention_block, config_.mock_seed) %
          sel.candidate_names.size());
    ojson obj = ojson::object();
    obj["id"] = std::to_string(idx);
    obj["name"] = sel.candidate_names[idx];
    return "```json\n" + obj.dump(4) + "\n```";
  }

  std::vector<float> embed_one(const std::string& text) const {
    const int dim = config_.mock_dim;
    std::vector<float> v(static_cast<std::size_t>(dim), 0.0f);
    if (text.size() < 3) {
      v[fnv1a64_seeded(text, config_.mock_seed) % dim] += 1.0f;
    } else {
      for (std::size_t i = 0; i + 3 <= text.size(); ++i)
        v[fnv1a64_seeded(text.substr(i, 3), config_.mock_seed) % dim] += 1.0f;
    }
    double norm = 0.0;
    for (float x : v) norm += static_cast<double>(x) * x;
    norm = std::sqrt(norm);
    if (norm > 0.0)
      for (auto& x : v) x = static_cast<float>(x / norm);
    return v;
  }

  GatewayConfig config_;
};

// ---------------------------------------------------------------------------
// HTTP backend (OpenAI-compatible)
// ---------------------------------------------------------------------------

class HttpGateway : public Gateway {
 public:
  explicit HttpGateway(GatewayConfig config)
      : config_(std::move(config)),
        inflight_(config_.max_inflight >= 1
                      ? config_.max_inflight
                      : throw Error(ErrorCode::bad_config, "max_inflight must be >= 1")) {
    split_endpoint(config_.endpoint_url, base_url_, path_prefix_);
  }

  std::string chat(const ChatRequest& request) override {
    check_chat_preconditions(request, false);
    return run_chat(request);
  }

  std::string chat_multimodal(const ChatRequest& request) override {
    check_chat_preconditions(request, true);
    return run_chat(request);
  }

  std::vector<std::vector<float>> embed(const std::vector<std::string>& texts) override {
    check_embed_preconditions(texts);
    std::vector<std::vector<float>> out(texts.size());
    const std::size_t batch = static_cast<std::size_t>(std::max(1, config_.embed_batch));
    std::size_t expected_dim = 0;
    for (std::size_t start = 0; start < texts.size(); start += batch) {
      const std::size_t count = std::min(batch, texts.size() - start);
      ojson body = ojson::object();
      body["model"] = config_.model_name;
      body["input"] = ojson::array();
      for (std::size_t i = 0; i < count; ++i) body["input"].push_back(texts[start + i]);

      ojson reply = post_json("/embeddings", body);
      if (!reply.contains("data") || !reply["data"].is_array() ||
          reply["data"].size() != count)
        throw Error(ErrorCode::malformed_response,
                    "embeddings reply missing/short 'data' array");
      std::vector<bool> seen(count, false);
      for (const auto& item : reply["data"]) {
        if (!item.contains("embedding") || !item["embedding"].is_array())
          throw Error(ErrorCode::malformed_response, "embedding item without vector");
        // Servers may return items out of order; "index" restores it.
        std::size_t idx = item.value("index", static_cast<std::size_t>(0));
        if (idx >= count || seen[idx])
          throw Error(ErrorCode::malformed_response,
                      "embedding item with bad index " + std::to_string(idx));
        seen[idx] = true;
        std::vector<float> vec;
        vec.reserve(item["embedding"].size());
        for (const auto& x : item["embedding"]) {
          if (!x.is_number())
            throw Error(ErrorCode::malformed_response, "non-numeric embedding value");
          vec.push_back(x.get<float>());
        }
        if (expected_dim == 0) expected_dim = vec.size();
        if (vec.size() != expected_dim || vec.empty())
          throw Error(ErrorCode::dim_mismatch,
                      "embedding dim " + std::to_string(vec.size()) + " != " +
                          std::to_string(expected_dim));
        out[start + idx] = std::move(vec);
      }
      record_usage(reply);
    }
    return out;
  }

  std::string model_tag() const override { return config_.model_name; }

 private:
  static void split_endpoint(const std::string& url, std::string& base,
                             std::string& prefix) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
      throw Error(ErrorCode::bad_config, "endpoint url needs a scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
      base = url;
      prefix.clear();
    } else {
      base = url.substr(0, path_start);
      prefix = url.substr(path_start);
    }
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  }

  std::string run_chat(const ChatRequest& r) {
    ojson body = ojson::object();
    body["model"] = config_.model_name;
    body["messages"] = ojson::array();
    if (r.system) {
      ojson sys = ojson::object();
      sys["role"] = "system";
      sys["content"] = *r.system;
      body["messages"].push_back(sys);
    }
    ojson user = ojson::object();
    user["role"] = "user";
    if (r.image) {
      ojson text_part = ojson::object();
      text_part["type"] = "text";
      text_part["text"] = r.user;
      ojson image_part = ojson::object();
      image_part["type"] = "image_url";
      image_part["image_url"] = ojson::object();
      image_part["image_url"]["url"] = std::string("data:") +
                                       image_media_mime(r.image_media) + ";base64," +
                                       base64_encode(*r.image);
      user["content"] = ojson::array({text_part, image_part});
    } else {
      user["content"] = r.user;
    }
    body["messages"].push_back(user);
    body["temperature"] = r.temperature;
    body["max_tokens"] = r.max_tokens;

    ojson reply = post_json("/chat/completions", body);
    record_usage(reply);
    if (!reply.contains("choices") || !reply["choices"].is_array() ||
        reply["choices"].empty())
      throw Error(ErrorCode::malformed_response, "chat reply without choices");
    const auto& msg = reply["choices"][0];
    if (!msg.contains("message") || !msg["message"].contains("content") ||
        !msg["message"]["content"].is_string())
      throw Error(ErrorCode::malformed_response, "chat reply without message content");
    return msg["message"]["content"].get<std::string>();
  }

  void record_usage(const ojson& reply) {
    if (reply.contains("usage") && reply["usage"].contains("total_tokens") &&
        reply["usage"]["total_tokens"].is_number())
      tokens_.fetch_add(reply["usage"]["total_tokens"].get<long>());
  }

  static bool retryable_status(int status) {
    return status == 408 || status == 429 || status >= 500;
  }

  ojson post_json(const std::string& path, const ojson& body) {
    inflight_.acquire();
    struct Release {
      std::counting_semaphore<>& sem;
      ~Release() { sem.release(); }
    } release{inflight_};

    const std::string payload = body.dump();
    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
      if (attempt > 0) {
        retries_.fetch_add(1);
        int delay = config_.backoff_base_ms * (1 << std::min(attempt - 1, 4));
        std::this_thread::sleep_for(std::chrono::milliseconds(delay));
      }
      requests_.fetch_add(1);

      httplib::Client client(base_url_);
      client.set_connection_timeout(std::chrono::milliseconds(
          static_cast<long>(config_.timeout_seconds * 1000)));
      client.set_read_timeout(std::chrono::milliseconds(
          static_cast<long>(config_.timeout_seconds * 1000)));
      client.set_write_timeout(std::chrono::milliseconds(
          static_cast<long>(config_.timeout_seconds * 1000)));
      httplib::Headers headers;
      if (const char* key = std::getenv(config_.api_key_env.c_str());
          key && *key)
        headers.emplace("Authorization", std::string("Bearer ") + key);

      auto res = client.Post(path_prefix_ + path, headers, payload,
                             "application/json");
      if (!res) {
        last_error = "transport error: " + httplib::to_string(res.error());
        continue;  // transient: connection refused, timeout, reset
      }
      if (res->status == 200) {
        try {
          return ojson::parse(res->body);
        } catch (const nlohmann::json::exception& e) {
          failures_.fetch_add(1);
          throw Error(ErrorCode::malformed_response,
                      std::string("bad JSON in reply: ") + e.what());
        }
      }
      std::string excerpt = res->body.substr(0, 200);
      if (!retryable_status(res->status)) {
        failures_.fetch_add(1);
        throw Error(ErrorCode::http_status,
                    "HTTP " + std::to_string(res->status) + ": " + excerpt);
      }
      last_error = "HTTP " + std::to_string(res->status) + ": " + excerpt;
    }
    failures_.fetch_add(1);
    throw Error(ErrorCode::retries_exhausted,
                "gave up after " + std::to_string(config_.max_retries + 1) +
                    " attempts; last: " + last_error);
  }

  GatewayConfig config_;
  std::string base_url_;
  std::string path_prefix_;
  std::counting_semaphore<> inflight_;
};

inline std::unique_ptr<Gateway> make_gateway(const GatewayConfig& config) {
  if (config.backend == Backend::mock)
    return std::make_unique<MockGateway>(config);
  return std::make_unique<HttpGateway>(config);
}

}  // namespace melkit
