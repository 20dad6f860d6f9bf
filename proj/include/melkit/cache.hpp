#pragma once

#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "melkit/errors.hpp"
#include "melkit/types.hpp"
#include "melkit/util.hpp"

// Append-only JSONL cache for model replies, keyed by
// (record id, template hash, model tag). Re-running augmentation with the same
// scaffold and model reuses cached replies instead of re-querying the backend;
// editing a scaffold changes its hash and naturally invalidates old entries.

namespace melkit {

class ReplyCache {
 public:
  ReplyCache() = default;

  // In-memory only when path is empty.
  explicit ReplyCache(std::string path) : path_(std::move(path)) {
    if (path_.empty()) return;
    std::ifstream in(path_, std::ios::binary);
    if (!in) return;  // first run: nothing cached yet
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (is_blank(line)) continue;
      ojson obj;
      try {
        obj = ojson::parse(line);
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::malformed_line,
                    "cache line " + std::to_string(lineno) + ": " + e.what(),
                    path_, lineno);
      }
      if (!obj.contains("key") || !obj["key"].is_string() ||
          !obj.contains("reply") || !obj["reply"].is_string())
        throw Error(ErrorCode::malformed_line,
                    "cache line " + std::to_string(lineno) +
                        ": expected string fields 'key' and 'reply'",
                    path_, lineno);
      entries_[obj["key"].get<std::string>()] = obj["reply"].get<std::string>();
    }
  }

  static std::string make_key(const std::string& record_id,
                              const std::string& template_hash,
                              const std::string& model_tag) {
    return record_id + '\x1f' + template_hash + '\x1f' + model_tag;
  }

  std::optional<std::string> get(const std::string& record_id,
                                 const std::string& template_hash,
                                 const std::string& model_tag) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = entries_.find(make_key(record_id, template_hash, model_tag));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  void put(const std::string& record_id, const std::string& template_hash,
           const std::string& model_tag, const std::string& reply) {
    std::string key = make_key(record_id, template_hash, model_tag);
    std::lock_guard<std::mutex> lock(mutex_);
    entries_[key] = reply;
    if (path_.empty()) return;
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) throw Error(ErrorCode::io_error, "cannot append to " + path_, path_);
    ojson obj = ojson::object();
    obj["key"] = key;
    obj["reply"] = reply;
    out << obj.dump() << '\n';
  }

  std::size_t size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return entries_.size();
  }

 private:
  std::string path_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, std::string> entries_;
};

}  // namespace melkit
