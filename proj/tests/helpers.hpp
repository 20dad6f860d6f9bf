#pragma once

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "melkit/gateway.hpp"
#include "melkit/util.hpp"

// Shared test scaffolding: temp directories, fixture lookup, and a scriptable
// gateway double for exercising callers without the mock backend's rules.

namespace testkit {

// Self-deleting scratch directory under the system temp root.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    namespace fs = std::filesystem;
    std::string tmpl =
        (fs::temp_directory_path() / ("melkit_" + tag + "_XXXXXX")).string();
    std::vector<char> buf(tmpl.begin(), tmpl.end());
    buf.push_back('\0');
    if (!mkdtemp(buf.data())) throw std::runtime_error("mkdtemp failed");
    path_ = buf.data();
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::string& path() const { return path_; }
  std::string file(const std::string& name) const { return path_ + "/" + name; }

 private:
  std::string path_;
};

inline std::string fixtures_dir() {
  if (const char* env = std::getenv("FIXTURES_DIR"); env && *env) return env;
#ifdef FIXTURES_DIR_PATH
  return FIXTURES_DIR_PATH;
#else
  return "tests/fixtures";
#endif
}

inline std::string fixture(const std::string& name) {
  return melkit::read_file(fixtures_dir() + "/" + name);
}

inline std::string cli_path() {
  if (const char* env = std::getenv("MELKIT_BIN"); env && *env) return env;
#ifdef MELKIT_BIN_PATH
  return MELKIT_BIN_PATH;
#else
  return "build/tools/melkit";
#endif
}

// Gateway double driven by std::function hooks. Precondition checks and
// telemetry counters behave exactly as in the real backends.
class ScriptedGateway : public melkit::Gateway {
 public:
  std::function<std::string(const melkit::ChatRequest&)> on_chat;
  std::function<std::string(const melkit::ChatRequest&)> on_chat_multimodal;
  std::function<std::vector<std::vector<float>>(const std::vector<std::string>&)>
      on_embed;
  std::string tag = "scripted";

  std::string chat(const melkit::ChatRequest& request) override {
    check_chat_preconditions(request, false);
    requests_.fetch_add(1);
    return on_chat ? on_chat(request) : "";
  }
  std::string chat_multimodal(const melkit::ChatRequest& request) override {
    check_chat_preconditions(request, true);
    requests_.fetch_add(1);
    return on_chat_multimodal ? on_chat_multimodal(request) : "";
  }
  std::vector<std::vector<float>> embed(const std::vector<std::string>& texts) override {
    check_embed_preconditions(texts);
    requests_.fetch_add(1);
    if (on_embed) return on_embed(texts);
    return std::vector<std::vector<float>>(texts.size(), {1.0f});
  }
  std::string model_tag() const override { return tag; }
};

}  // namespace testkit

// Assert that an expression throws melkit::Error with a specific code.
#define REQUIRE_ERROR(expr, expected_code)                        \
  do {                                                            \
    bool caught_melkit_error_ = false;                            \
    try {                                                         \
      (void)(expr);                                               \
    } catch (const melkit::Error& err_) {                         \
      caught_melkit_error_ = true;                                \
      REQUIRE(err_.code() == melkit::ErrorCode::expected_code);   \
    }                                                             \
    REQUIRE(caught_melkit_error_);                                \
  } while (0)
