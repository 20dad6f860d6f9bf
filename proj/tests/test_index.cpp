#include <catch2/catch_amalgamated.hpp>

#include <bit>
#include <cmath>
#include <cstdint>

#include "melkit/index.hpp"
#include "melkit/util.hpp"

#include "helpers.hpp"

using namespace melkit;

namespace {

std::vector<float> unit_row(std::vector<double> values) {
  double norm = 0.0;
  for (double v : values) norm += v * v;
  norm = std::sqrt(norm);
  std::vector<float> out;
  for (double v : values) out.push_back(static_cast<float>(v / norm));
  return out;
}

VectorIndex sample_index() {
  VectorIndex index;
  index.dim = 3;
  index.model_tag = "mock/3/9";
  index.ids = {"e1", "e2", "ent-three"};
  for (const auto& row : {unit_row({0.1, 0.2, 0.3}), unit_row({-1.0, 2.0, -3.0}),
                          std::vector<float>{1.0f, 0.0f, -0.0f}})
    index.vectors.insert(index.vectors.end(), row.begin(), row.end());
  return index;
}

std::string u32le(std::uint32_t v) {
  std::string out;
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  return out;
}

std::string f32le(float f) { return u32le(std::bit_cast<std::uint32_t>(f)); }

// Minimal hand-built file: one id, dim 1, a single row.
std::string craft_file(std::uint32_t dim, const std::vector<std::string>& ids,
                       const std::vector<float>& floats,
                       const std::string& magic = "MELX1") {
  std::string out = magic;
  out += u32le(dim);
  out += u32le(static_cast<std::uint32_t>(ids.size()));
  out += u32le(3);
  out += "tag";
  for (const auto& id : ids) {
    out += u32le(static_cast<std::uint32_t>(id.size()));
    out += id;
  }
  for (float f : floats) out += f32le(f);
  return out;
}

}  // namespace

TEST_CASE("index round-trips with exact float bits", "[index]") {
  testkit::TempDir tmp("index");
  VectorIndex index = sample_index();
  const std::string path = tmp.file("kb.melx");
  save_index(path, index);
  VectorIndex loaded = load_index(path);

  REQUIRE(loaded.dim == index.dim);
  REQUIRE(loaded.model_tag == index.model_tag);
  REQUIRE(loaded.ids == index.ids);
  REQUIRE(loaded.vectors.size() == index.vectors.size());
  for (std::size_t i = 0; i < index.vectors.size(); ++i)
    REQUIRE(std::bit_cast<std::uint32_t>(loaded.vectors[i]) ==
            std::bit_cast<std::uint32_t>(index.vectors[i]));

  // Serialization is deterministic: saving the loaded copy reproduces the file.
  const std::string again = tmp.file("kb2.melx");
  save_index(again, loaded);
  REQUIRE(read_file(again) == read_file(path));
}

TEST_CASE("loader rejects files that are not indexes", "[index]") {
  testkit::TempDir tmp("badmagic");
  const std::string path = tmp.file("bad.melx");
  write_file(path, craft_file(1, {"e1"}, {1.0f}, "MELX2"));
  try {
    load_index(path);
    FAIL("expected bad_index_file");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::bad_index_file);
    REQUIRE(std::string(e.message()).find("magic") != std::string::npos);
  }
  write_file(path, "hello world, definitely not binary");
  REQUIRE_ERROR(load_index(path), bad_index_file);
}

TEST_CASE("every truncation point reads as a typed error", "[index]") {
  testkit::TempDir tmp("trunc");
  VectorIndex index = sample_index();
  const std::string full_path = tmp.file("full.melx");
  save_index(full_path, index);
  const std::string bytes = read_file(full_path);

  // Cut inside each region: magic, header ints, tag, id table, vector data.
  const std::size_t cuts[] = {0, 3, 5, 7, 11, 15, 17, 22, 30, bytes.size() - 1};
  for (std::size_t cut : cuts) {
    CAPTURE(cut);
    REQUIRE(cut < bytes.size());
    const std::string path = tmp.file("cut.melx");
    write_file(path, bytes.substr(0, cut));
    REQUIRE_ERROR(load_index(path), bad_index_file);
  }

  const std::string junk = tmp.file("junk.melx");
  write_file(junk, bytes + "X");
  try {
    load_index(junk);
    FAIL("expected bad_index_file");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::bad_index_file);
    REQUIRE(std::string(e.message()).find("trailing") != std::string::npos);
  }
}

TEST_CASE("validation rejects malformed tables", "[index]") {
  testkit::TempDir tmp("invalid");
  const std::string path = tmp.file("x.melx");

  SECTION("duplicate ids in the file") {
    write_file(path, craft_file(1, {"a", "a"}, {1.0f, 1.0f}));
    REQUIRE_ERROR(load_index(path), bad_index_file);
  }
  SECTION("non-unit row in the file") {
    write_file(path, craft_file(1, {"a"}, {0.5f}));
    REQUIRE_ERROR(load_index(path), bad_index_file);
  }
  SECTION("zero dim in the file") {
    write_file(path, craft_file(0, {}, {}));
    REQUIRE_ERROR(load_index(path), bad_index_file);
  }
  SECTION("save refuses duplicate ids") {
    VectorIndex index;
    index.dim = 1;
    index.ids = {"a", "a"};
    index.vectors = {1.0f, 1.0f};
    REQUIRE_ERROR(save_index(path, index), bad_index_file);
  }
  SECTION("save refuses storage size mismatch") {
    VectorIndex index;
    index.dim = 3;
    index.ids = {"a", "b"};
    index.vectors = std::vector<float>(5, 0.0f);
    REQUIRE_ERROR(save_index(path, index), bad_index_file);
  }
  SECTION("save refuses zero dim") {
    VectorIndex index;
    index.ids = {};
    REQUIRE_ERROR(save_index(path, index), bad_index_file);
  }
  SECTION("save refuses denormalized rows") {
    VectorIndex index;
    index.dim = 2;
    index.ids = {"a"};
    index.vectors = {0.8f, 0.8f};
    REQUIRE_ERROR(save_index(path, index), bad_index_file);
  }
}

TEST_CASE("row lookup by id", "[index]") {
  VectorIndex index = sample_index();
  REQUIRE(index.find("e1") == 0);
  REQUIRE(index.find("e2") == 1);
  REQUIRE(index.find("ent-three") == 2);
  REQUIRE(index.find("ghost") == -1);
  VectorIndex empty;
  REQUIRE(empty.find("e1") == -1);
}

TEST_CASE("missing index file is an io error", "[index]") {
  testkit::TempDir tmp("missing");
  REQUIRE_ERROR(load_index(tmp.file("nope.melx")), io_error);
}
