#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <vector>

#include "stitch/types.hpp"

namespace stitch {

/// Row-major float image plane, indexed plane(y, x).
using PlaneF = Eigen::Array<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// 8-bit RGB raster with an optional per-pixel validity mask. The mask is
/// empty (all pixels valid) or width*height bytes of 0/1.
struct Frame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // width*height*3, R,G,B interleaved
  std::vector<std::uint8_t> mask;  // empty, or width*height

  Frame() = default;
  Frame(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, fill) {}

  static Frame with_mask(int w, int h, std::uint8_t fill = 0,
                         std::uint8_t mask_fill = 1) {
    Frame f(w, h, fill);
    f.mask.assign(static_cast<std::size_t>(w) * h, mask_fill);
    return f;
  }

  bool has_mask() const { return !mask.empty(); }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * height;
  }
  std::size_t index(int x, int y) const {
    return (static_cast<std::size_t>(y) * width + x);
  }

  const std::uint8_t* px(int x, int y) const { return &data[index(x, y) * 3]; }
  std::uint8_t* px(int x, int y) { return &data[index(x, y) * 3]; }

  bool valid_at(int x, int y) const {
    if (x < 0 || y < 0 || x >= width || y >= height) return false;
    return mask.empty() || mask[index(x, y)] != 0;
  }
  void set_valid(int x, int y, bool v) {
    if (mask.empty()) mask.assign(pixel_count(), 1);
    mask[index(x, y)] = v ? 1 : 0;
  }

  Region full_region() const { return Region{0, 0, width, height}; }

  friend bool operator==(const Frame&, const Frame&) = default;
};

/// Rounds half away from zero and clamps to [0, 255].
std::uint8_t quantize_channel(double v);

/// Rec. 601 luma of an 8-bit RGB triple, as float in [0, 255].
inline float luma601(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  return 0.299f * r + 0.587f * g + 0.114f * b;
}

/// Grayscale plane of a frame (Rec. 601), invalid pixels read as 0.
PlaneF to_luma(const Frame& frame);

void check_region(const Frame& frame, const Region& region);

struct BilinearSample {
  Eigen::Vector3f rgb = Eigen::Vector3f::Zero();
  bool valid = false;
};

/// Bilinear sample at real coordinates (x, y), pixel centers at integers.
/// Out-of-frame or masked neighbors drop out and the remaining weights are
/// renormalized; with no valid neighbor the sample is invalid.
BilinearSample sample_bilinear(const Frame& frame, double x, double y);

/// Copy of the region as its own frame (mask included).
Frame crop_frame(const Frame& frame, const Region& region);

}  // namespace stitch
