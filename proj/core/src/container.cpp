#include "pnnp/container.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace pnnp {

namespace {

using json = nlohmann::ordered_json;

void put_u64le(unsigned char* dst, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) dst[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
}

std::uint64_t get_u64le(const unsigned char* src) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(src[i]) << (8 * i);
  return v;
}

void put_f32le(unsigned char* dst, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  if constexpr (std::endian::native == std::endian::big)
    bits = __builtin_bswap32(bits);
  std::memcpy(dst, &bits, 4);
}

float get_f32le(const unsigned char* src) {
  std::uint32_t bits;
  std::memcpy(&bits, src, 4);
  if constexpr (std::endian::native == std::endian::big)
    bits = __builtin_bswap32(bits);
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}

std::string sidecar_path(const std::string& path) { return path + ".json"; }

}  // namespace

void write_array(const Array2D& array, const std::string& path) {
  if (array.data.size() != array.height * array.width)
    throw std::invalid_argument("write_array: payload length does not match shape");
  std::vector<unsigned char> buf(kContainerHeaderSize + array.data.size() * 4, 0);
  buf[0] = 'P'; buf[1] = 'N'; buf[2] = 'N'; buf[3] = 'F';
  buf[4] = 1;  // version
  buf[5] = 1;  // dtype f32le
  put_u64le(buf.data() + 8, array.height);
  put_u64le(buf.data() + 16, array.width);
  for (std::size_t i = 0; i < array.data.size(); ++i)
    put_f32le(buf.data() + kContainerHeaderSize + 4 * i, array.data[i]);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("write_array: cannot open " + path);
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
  if (!out) throw std::runtime_error("write_array: write failed for " + path);
}

Array2D read_array(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_array: cannot open " + path);
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  if (buf.size() < kContainerHeaderSize)
    throw std::runtime_error("read_array: file shorter than header: " + path);
  if (buf[0] != 'P' || buf[1] != 'N' || buf[2] != 'N' || buf[3] != 'F')
    throw std::runtime_error("read_array: bad magic in " + path);
  if (buf[4] != 1)
    throw std::runtime_error("read_array: unsupported version in " + path);
  if (buf[5] != 1)
    throw std::runtime_error("read_array: unsupported dtype code in " + path);

  Array2D a;
  a.height = get_u64le(buf.data() + 8);
  a.width = get_u64le(buf.data() + 16);
  const std::size_t expect = kContainerHeaderSize + a.height * a.width * 4;
  if (buf.size() != expect)
    throw std::runtime_error("read_array: payload length mismatch in " + path);
  a.data.resize(a.height * a.width);
  for (std::size_t i = 0; i < a.data.size(); ++i)
    a.data[i] = get_f32le(buf.data() + kContainerHeaderSize + 4 * i);
  return a;
}

void write_frame(const RawFrame& frame, const std::string& path) {
  validate_frame(frame);
  Array2D a{frame.height, frame.width, frame.data};
  write_array(a, path);

  json meta;
  meta["container"] = std::filesystem::path(path).filename().string();
  meta["iso"] = frame.iso;
  meta["black_level"] = frame.black_level;
  meta["white_level"] = frame.white_level;
  meta["bit_depth"] = frame.bit_depth;
  meta["quantized"] = frame.quantized;
  std::ofstream out(sidecar_path(path), std::ios::trunc);
  if (!out) throw std::runtime_error("write_frame: cannot open sidecar for " + path);
  out << meta.dump(2) << "\n";
}

RawFrame read_frame(const std::string& path) {
  Array2D a = read_array(path);

  std::ifstream in(sidecar_path(path));
  if (!in) throw std::runtime_error("read_frame: missing sidecar for " + path);
  json meta = json::parse(in);

  RawFrame f;
  f.height = a.height;
  f.width = a.width;
  f.data = std::move(a.data);
  f.iso = meta.at("iso").get<int>();
  f.black_level = meta.at("black_level").get<double>();
  f.white_level = meta.at("white_level").get<double>();
  f.bit_depth = meta.at("bit_depth").get<int>();
  f.quantized = meta.value("quantized", true);
  validate_frame(f);
  return f;
}

}  // namespace pnnp
