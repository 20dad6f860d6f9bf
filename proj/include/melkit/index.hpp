#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>
#include <unordered_map>
#include <vector>

#include "melkit/errors.hpp"
#include "melkit/util.hpp"

// Vectorized knowledge base: one L2-normalized row per entity plus the id
// table and a tag identifying the embedding backend that produced it.
//
// Binary file layout (all integers little-endian):
//   magic "MELX1" (5 bytes)
//   dim   u32
//   count u32
//   model_tag: u32 length + UTF-8 bytes
//   ids:   count × (u32 length + UTF-8 bytes)
//   vectors: count × dim float32, row-major
// Rows are stored normalized, so query-time scoring is a pure dot product.

namespace melkit {

struct VectorIndex {
  std::uint32_t dim = 0;
  std::string model_tag;
  std::vector<std::string> ids;
  std::vector<float> vectors;  // row-major, ids.size() × dim

  const float* row(std::size_t i) const { return vectors.data() + i * dim; }
  std::size_t count() const { return ids.size(); }

  // Row lookup by entity id; -1 when absent.
  long find(const std::string& id) const {
    if (by_id_.empty() && !ids.empty()) {
      for (std::size_t i = 0; i < ids.size(); ++i) by_id_[ids[i]] = static_cast<long>(i);
    }
    auto it = by_id_.find(id);
    return it == by_id_.end() ? -1 : it->second;
  }

 private:
  mutable std::unordered_map<std::string, long> by_id_;
};

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline void put_f32(std::string& out, float f) {
  put_u32(out, std::bit_cast<std::uint32_t>(f));
}

class ByteReader {
 public:
  ByteReader(const std::string& data, const std::string& path)
      : data_(data), path_(path) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i]))
           << (8 * i);
    pos_ += 4;
    return v;
  }

  float f32() { return std::bit_cast<float>(u32()); }

  std::string bytes(std::size_t n) {
    need(n);
    std::string out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  bool at_end() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) {
    if (pos_ + n > data_.size())
      throw Error(ErrorCode::bad_index_file, "truncated index file", path_);
  }
  const std::string& data_;
  std::string path_;
  std::size_t pos_ = 0;
};

constexpr const char* kIndexMagic = "MELX1";

}  // namespace detail

inline void validate_index(const VectorIndex& index, const std::string& where) {
  if (index.dim == 0)
    throw Error(ErrorCode::bad_index_file, "index dim must be positive", where);
  if (index.vectors.size() != index.ids.size() * index.dim)
    throw Error(ErrorCode::bad_index_file, "vector storage size mismatch", where);
  std::unordered_map<std::string, int> seen;
  for (const auto& id : index.ids) {
    if (++seen[id] > 1)
      throw Error(ErrorCode::bad_index_file, "duplicate id '" + id + "' in index",
                  where);
  }
  for (std::size_t i = 0; i < index.count(); ++i) {
    double norm = 0.0;
    const float* r = index.row(i);
    for (std::uint32_t d = 0; d < index.dim; ++d)
      norm += static_cast<double>(r[d]) * r[d];
    norm = std::sqrt(norm);
    if (std::fabs(norm - 1.0) > 1e-6)
      throw Error(ErrorCode::bad_index_file,
                  "row " + std::to_string(i) + " norm " + std::to_string(norm) +
                      " is not 1",
                  where);
  }
}

inline void save_index(const std::string& path, const VectorIndex& index) {
  validate_index(index, path);
  std::string out;
  out.reserve(16 + index.vectors.size() * 4);
  out += detail::kIndexMagic;
  detail::put_u32(out, index.dim);
  detail::put_u32(out, static_cast<std::uint32_t>(index.count()));
  detail::put_u32(out, static_cast<std::uint32_t>(index.model_tag.size()));
  out += index.model_tag;
  for (const auto& id : index.ids) {
    detail::put_u32(out, static_cast<std::uint32_t>(id.size()));
    out += id;
  }
  for (float f : index.vectors) detail::put_f32(out, f);
  write_file(path, out);
}

inline VectorIndex load_index(const std::string& path) {
  std::string data = read_file(path);
  detail::ByteReader in(data, path);
  if (in.bytes(5) != detail::kIndexMagic)
    throw Error(ErrorCode::bad_index_file, "bad magic bytes (not an index file)",
                path);
  VectorIndex index;
  index.dim = in.u32();
  std::uint32_t count = in.u32();
  index.model_tag = in.bytes(in.u32());
  index.ids.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) index.ids.push_back(in.bytes(in.u32()));
  index.vectors.resize(static_cast<std::size_t>(count) * index.dim);
  for (auto& f : index.vectors) f = in.f32();
  if (!in.at_end())
    throw Error(ErrorCode::bad_index_file, "trailing bytes after vector data", path);
  validate_index(index, path);
  return index;
}

}  // namespace melkit
