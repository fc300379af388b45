#include <doctest.h>

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "augablate/core/rng.hpp"
#include "augablate/nn/checkpoint.hpp"

using namespace augb;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::vector<char> slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

Tensor<float> filled(const Shape& s, std::uint64_t seed) {
  Tensor<float> t(s);
  Rng rng(seed);
  for (Index i = 0; i < t.size(); ++i) t[i] = static_cast<float>(rng.uniform(-2.0, 2.0));
  return t;
}

}  // namespace

TEST_CASE("checkpoints round-trip tensors bit for bit") {
  const Tensor<float> kernel = filled({3, 3, 2, 4}, 1);
  const Tensor<float> bias = filled({4}, 2);
  const Tensor<float> stats = filled({2, 7}, 3);
  const std::string path = temp_path("augb_ckpt_roundtrip.augb");
  save_checkpoint(path, {{"conv.kernel", &kernel}, {"conv.bias", &bias}, {"bn.stats", &stats}});

  const auto loaded = load_checkpoint(path);
  REQUIRE(loaded.size() == 3);
  REQUIRE(loaded.count("conv.kernel") == 1);
  REQUIRE(loaded.count("conv.bias") == 1);
  REQUIRE(loaded.count("bn.stats") == 1);
  CHECK(loaded.at("conv.kernel").shape() == kernel.shape());
  CHECK(loaded.at("bn.stats").shape() == stats.shape());
  for (Index i = 0; i < kernel.size(); ++i)
    REQUIRE(loaded.at("conv.kernel")[i] == kernel[i]);
  for (Index i = 0; i < bias.size(); ++i) REQUIRE(loaded.at("conv.bias")[i] == bias[i]);
  for (Index i = 0; i < stats.size(); ++i) REQUIRE(loaded.at("bn.stats")[i] == stats[i]);
  std::remove(path.c_str());
}

TEST_CASE("the on-disk layout is the documented little-endian record stream") {
  Tensor<float> t({2}, {1.5f, -0.25f});
  const std::string path = temp_path("augb_ckpt_layout.augb");
  save_checkpoint(path, {{"ab", &t}});
  const std::vector<char> bytes = slurp(path);

  // magic, version u32, count u32, name_len u32, "ab", rank u32,
  // extent u64, payload 2 x f32
  REQUIRE(bytes.size() == 4 + 4 + 4 + 4 + 2 + 4 + 8 + 8);
  CHECK(std::memcmp(bytes.data(), "AUGB", 4) == 0);
  std::uint32_t version, count, name_len, rank;
  std::memcpy(&version, bytes.data() + 4, 4);
  std::memcpy(&count, bytes.data() + 8, 4);
  std::memcpy(&name_len, bytes.data() + 12, 4);
  CHECK(version == 1);
  CHECK(count == 1);
  CHECK(name_len == 2);
  CHECK(bytes[16] == 'a');
  CHECK(bytes[17] == 'b');
  std::memcpy(&rank, bytes.data() + 18, 4);
  CHECK(rank == 1);
  std::uint64_t extent;
  std::memcpy(&extent, bytes.data() + 22, 8);
  CHECK(extent == 2);
  float v0, v1;
  std::memcpy(&v0, bytes.data() + 30, 4);
  std::memcpy(&v1, bytes.data() + 34, 4);
  CHECK(v0 == 1.5f);
  CHECK(v1 == -0.25f);
  std::remove(path.c_str());
}

TEST_CASE("scalar-rank tensors and empty checkpoints survive") {
  Tensor<float> scalar(Shape{});  // rank 0, one element
  scalar[0] = 3.5f;
  const std::string path = temp_path("augb_ckpt_scalar.augb");
  save_checkpoint(path, {{"s", &scalar}});
  auto loaded = load_checkpoint(path);
  REQUIRE(loaded.at("s").size() == 1);
  CHECK(loaded.at("s")[0] == 3.5f);

  save_checkpoint(path, {});
  loaded = load_checkpoint(path);
  CHECK(loaded.empty());
  std::remove(path.c_str());
}

TEST_CASE("corrupt checkpoints are refused with specific errors") {
  const Tensor<float> t = filled({4, 4}, 9);
  const std::string path = temp_path("augb_ckpt_corrupt.augb");
  save_checkpoint(path, {{"w", &t}});
  const std::vector<char> good = slurp(path);

  const auto write_bytes = [&](const std::vector<char>& b) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    os.write(b.data(), static_cast<std::streamsize>(b.size()));
  };

  // Bad magic.
  auto bad = good;
  bad[0] = 'X';
  write_bytes(bad);
  CHECK_THROWS_WITH_AS(load_checkpoint(path), doctest::Contains("magic"), std::runtime_error);

  // Unsupported version.
  bad = good;
  bad[4] = 99;
  write_bytes(bad);
  CHECK_THROWS_WITH_AS(load_checkpoint(path), doctest::Contains("version"), std::runtime_error);

  // Truncated payload.
  bad = good;
  bad.resize(bad.size() - 7);
  write_bytes(bad);
  CHECK_THROWS_WITH_AS(load_checkpoint(path), doctest::Contains("truncated"),
                       std::runtime_error);

  // Truncated header.
  bad = good;
  bad.resize(10);
  write_bytes(bad);
  CHECK_THROWS_AS(load_checkpoint(path), std::runtime_error);

  std::remove(path.c_str());
  CHECK_THROWS_AS(load_checkpoint(path), std::runtime_error);  // gone entirely
}

TEST_CASE("duplicate tensor names are rejected at load time") {
  const Tensor<float> t = filled({2}, 11);
  const std::string path = temp_path("augb_ckpt_dupe.augb");
  save_checkpoint(path, {{"twin", &t}, {"twin", &t}});
  CHECK_THROWS_WITH_AS(load_checkpoint(path), doctest::Contains("duplicate"),
                       std::runtime_error);
  std::remove(path.c_str());
}
