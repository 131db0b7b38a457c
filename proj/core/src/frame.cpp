#include "pnnp/frame.hpp"

#include <cmath>
#include <stdexcept>

namespace pnnp {

void validate_frame(const RawFrame& frame) {
  if (frame.height == 0 || frame.width == 0)
    throw std::invalid_argument("frame: empty shape");
  if (frame.data.size() != frame.height * frame.width)
    throw std::invalid_argument("frame: data length does not match height*width");
  if (frame.iso <= 0) throw std::invalid_argument("frame: iso must be positive");
  if (!(frame.black_level < frame.white_level))
    throw std::invalid_argument("frame: black_level must be below white_level");
  if (frame.bit_depth <= 0 || frame.bit_depth > 24)
    throw std::invalid_argument("frame: unsupported bit depth");
  if (frame.quantized) {
    const float top = static_cast<float>((1u << frame.bit_depth) - 1u);
    for (float v : frame.data) {
      if (!(v >= 0.0f && v <= top))
        throw std::invalid_argument("frame: quantized value out of range");
      if (v != std::floor(v))
        throw std::invalid_argument("frame: quantized value not integral");
    }
  }
}

void validate_frame_set(const FrameSet& set) {
  if (set.frames.empty()) throw std::invalid_argument("frame set: empty");
  const RawFrame& first = set.frames.front();
  for (const RawFrame& f : set.frames) {
    validate_frame(f);
    if (f.iso != set.iso) throw std::invalid_argument("frame set: iso mismatch");
    if (f.height != first.height || f.width != first.width)
      throw std::invalid_argument("frame set: shape mismatch");
    if (f.black_level != first.black_level)
      throw std::invalid_argument("frame set: black level mismatch");
  }
}

}  // namespace pnnp
