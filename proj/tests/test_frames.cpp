#include <doctest.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

#include "pnnp/container.hpp"
#include "pnnp/frame.hpp"
#include "pnnp/rng.hpp"

using namespace pnnp;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / "pnnp_frame_tests";
  fs::create_directories(dir);
  return dir;
}

RawFrame random_frame(RandomStream& rng, bool quantized) {
  RawFrame f;
  f.height = 1 + rng.next_u64() % 8;
  f.width = 1 + rng.next_u64() % 8;
  f.iso = 100 * (1 + static_cast<int>(rng.next_u64() % 8));
  f.black_level = 512.0;
  f.white_level = 4095.0;
  f.bit_depth = 12;
  f.quantized = quantized;
  f.data.resize(f.pixel_count());
  for (float& v : f.data) {
    if (quantized)
      v = static_cast<float>(rng.next_u64() % 4096);
    else
      v = static_cast<float>(rng.normal() * 100.0);
  }
  return f;
}

std::vector<unsigned char> slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("round-trip identity over random frames") {
  RandomStream rng(101);
  const fs::path path = temp_dir() / "roundtrip.pnnf";
  for (int it = 0; it < 50; ++it) {
    const RawFrame f = random_frame(rng, it % 2 == 0);
    write_frame(f, path.string());
    const RawFrame g = read_frame(path.string());
    REQUIRE(g.height == f.height);
    REQUIRE(g.width == f.width);
    CHECK(g.iso == f.iso);
    CHECK(g.black_level == f.black_level);
    CHECK(g.white_level == f.white_level);
    CHECK(g.bit_depth == f.bit_depth);
    CHECK(g.quantized == f.quantized);
    REQUIRE(g.data.size() == f.data.size());
    for (std::size_t i = 0; i < f.data.size(); ++i) {
      std::uint32_t ba, bb;
      std::memcpy(&ba, &f.data[i], 4);
      std::memcpy(&bb, &g.data[i], 4);
      CHECK(ba == bb);  // bit-exact
    }
  }
}

TEST_CASE("write is deterministic for equal content") {
  RandomStream rng(7);
  const RawFrame f = random_frame(rng, true);
  const fs::path p1 = temp_dir() / "det1.pnnf";
  const fs::path p2 = temp_dir() / "det2.pnnf";
  write_frame(f, p1.string());
  write_frame(f, p2.string());
  CHECK(slurp(p1) == slurp(p2));
}

TEST_CASE("independent decoder agrees with the format definition") {
  RawFrame f;
  f.height = 2;
  f.width = 3;
  f.iso = 400;
  f.black_level = 512;
  f.white_level = 4095;
  f.bit_depth = 12;
  f.data = {1, 2, 3, 4, 5, 4095};
  const fs::path path = temp_dir() / "fmt.pnnf";
  write_frame(f, path.string());

  const auto bytes = slurp(path);
  REQUIRE(bytes.size() == 32 + 6 * 4);
  CHECK(bytes[0] == 'P');
  CHECK(bytes[1] == 'N');
  CHECK(bytes[2] == 'N');
  CHECK(bytes[3] == 'F');
  CHECK(bytes[4] == 1);
  CHECK(bytes[5] == 1);
  CHECK(bytes[6] == 0);
  CHECK(bytes[7] == 0);
  auto u64 = [&](std::size_t off) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(bytes[off + i]) << (8 * i);
    return v;
  };
  CHECK(u64(8) == 2);
  CHECK(u64(16) == 3);
  CHECK(u64(24) == 0);
  for (std::size_t i = 0; i < 6; ++i) {
    std::uint32_t bits = 0;
    for (int k = 0; k < 4; ++k)
      bits |= std::uint32_t(bytes[32 + 4 * i + k]) << (8 * k);
    float v;
    std::memcpy(&v, &bits, 4);
    CHECK(v == f.data[i]);
  }
}

TEST_CASE("flipping one payload byte changes exactly that pixel") {
  RandomStream rng(77);
  const RawFrame f = random_frame(rng, true);
  const fs::path path = temp_dir() / "flip.pnnf";
  write_frame(f, path.string());

  // byte-offset oracle from the format definition: pixel i starts at 32+4i
  const std::size_t pixel = f.pixel_count() / 2;
  auto bytes = slurp(path);
  bytes[32 + 4 * pixel + 1] ^= 0x01;
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
  }
  Array2D a = read_array(path.string());
  std::size_t differing = 0, where = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i)
    if (a.data[i] != f.data[i]) {
      ++differing;
      where = i;
    }
  CHECK(differing == 1);
  CHECK(where == pixel);
}

TEST_CASE("malformed containers are rejected") {
  const fs::path path = temp_dir() / "bad.pnnf";
  RawFrame f;
  f.height = 4;
  f.width = 4;
  f.iso = 100;
  f.black_level = 0;
  f.white_level = 15;
  f.bit_depth = 4;
  f.data.assign(16, 1.0f);
  write_frame(f, path.string());

  SUBCASE("bad magic") {
    auto bytes = slurp(path);
    bytes[0] = 'X';
    std::ofstream(path, std::ios::binary | std::ios::trunc)
        .write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    CHECK_THROWS(read_array(path.string()));
  }
  SUBCASE("truncated payload") {
    auto bytes = slurp(path);
    bytes.resize(32 + 8 * 4);  // header claims 16 values, file has 8
    std::ofstream(path, std::ios::binary | std::ios::trunc)
        .write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    CHECK_THROWS(read_array(path.string()));
  }
  SUBCASE("unsupported dtype") {
    auto bytes = slurp(path);
    bytes[5] = 9;
    std::ofstream(path, std::ios::binary | std::ios::trunc)
        .write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    CHECK_THROWS(read_array(path.string()));
  }
}

TEST_CASE("quantized range bound at the bit depth") {
  RawFrame f;
  f.height = 1;
  f.width = 1;
  f.iso = 100;
  f.black_level = 512;
  f.white_level = 4095;
  f.bit_depth = 12;
  f.quantized = true;
  f.data = {4095.0f};
  CHECK_NOTHROW(validate_frame(f));
  f.data = {4096.0f};
  CHECK_THROWS(validate_frame(f));
  f.data = {12.5f};
  CHECK_THROWS(validate_frame(f));
  f.quantized = false;
  CHECK_NOTHROW(validate_frame(f));
}

TEST_CASE("length invariant enforced") {
  RawFrame f;
  f.height = 4;
  f.width = 4;
  f.iso = 100;
  f.black_level = 0;
  f.white_level = 100;
  f.bit_depth = 10;
  f.data.assign(8, 0.0f);  // wrong: 16 expected
  CHECK_THROWS(validate_frame(f));
}

TEST_CASE("1x1 frame value zero survives the trip") {
  RawFrame f;
  f.height = 1;
  f.width = 1;
  f.iso = 200;
  f.black_level = 0;
  f.white_level = 3;
  f.bit_depth = 2;
  f.data = {0.0f};
  const fs::path path = temp_dir() / "one.pnnf";
  write_frame(f, path.string());
  CHECK(read_frame(path.string()).data[0] == 0.0f);
}
