#ifndef PNNP_FRAME_HPP
#define PNNP_FRAME_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace pnnp {

/// One 2-D sensor readout plus acquisition metadata. Values are stored as
/// real-valued DN even when quantized; every bit depth used here is exactly
/// representable in a 32-bit float.
struct RawFrame {
  std::size_t height = 0;
  std::size_t width = 0;
  int iso = 0;
  double black_level = 0.0;
  double white_level = 0.0;
  int bit_depth = 0;
  bool quantized = true;
  std::vector<float> data;  // row-major, height*width

  std::size_t pixel_count() const { return height * width; }
  float& at(std::size_t r, std::size_t c) { return data[r * width + c]; }
  float at(std::size_t r, std::size_t c) const { return data[r * width + c]; }
};

/// Throws std::invalid_argument if the frame breaks a structural invariant
/// (shape/length mismatch, black >= white, quantized values out of
/// [0, 2^bit_depth - 1] or non-integral).
void validate_frame(const RawFrame& frame);

/// Ordered set of frames sharing (height, width, iso, black_level).
struct FrameSet {
  int iso = 0;
  std::vector<RawFrame> frames;
};

void validate_frame_set(const FrameSet& set);

}  // namespace pnnp

#endif  // PNNP_FRAME_HPP
