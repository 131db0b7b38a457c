#ifndef PNNP_CONTAINER_HPP
#define PNNP_CONTAINER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "pnnp/frame.hpp"

namespace pnnp {

/// Plain 2-D array, the payload of the binary container.
struct Array2D {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<float> data;  // row-major

  float& at(std::size_t r, std::size_t c) { return data[r * width + c]; }
  float at(std::size_t r, std::size_t c) const { return data[r * width + c]; }
};

// Binary container layout (all multi-byte fields little-endian):
//   bytes 0-3   magic "PNNF"
//   byte  4     version = 1
//   byte  5     dtype code (1 = f32le)
//   bytes 6-7   reserved, zero
//   bytes 8-15  height (u64)
//   bytes 16-23 width (u64)
//   bytes 24-31 reserved, zero
//   then height*width*4 payload bytes, row-major.
inline constexpr std::size_t kContainerHeaderSize = 32;

void write_array(const Array2D& array, const std::string& path);
Array2D read_array(const std::string& path);

/// Writes the container plus a JSON metadata sidecar at path + ".json".
void write_frame(const RawFrame& frame, const std::string& path);

/// Reads container + sidecar and validates the frame invariants.
RawFrame read_frame(const std::string& path);

}  // namespace pnnp

#endif  // PNNP_CONTAINER_HPP
