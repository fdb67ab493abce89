#pragma once

#include <random>

#include "stitch/frame.hpp"
#include "stitch/synth.hpp"

namespace stitch::test {

inline Frame random_frame(std::uint64_t seed, int w, int h,
                          double mask_drop = 0.0) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> level(0, 255);
  std::bernoulli_distribution drop(mask_drop);
  Frame f = mask_drop > 0 ? Frame::with_mask(w, h) : Frame(w, h);
  for (auto& v : f.data) v = static_cast<std::uint8_t>(level(rng));
  if (mask_drop > 0) {
    for (auto& m : f.mask) m = drop(rng) ? 0 : 1;
  }
  return f;
}

inline Frame constant_frame(int w, int h, std::uint8_t r, std::uint8_t g,
                            std::uint8_t b) {
  Frame f(w, h);
  for (std::size_t i = 0; i < f.pixel_count(); ++i) {
    f.data[3 * i + 0] = r;
    f.data[3 * i + 1] = g;
    f.data[3 * i + 2] = b;
  }
  return f;
}

/// Textured frame from the procedural world texture (rich in features).
inline Frame textured_frame(std::uint64_t seed, int w, int h,
                            double origin_x = 0.0, double origin_y = 0.0,
                            double gain_r = 1.0, double gain_g = 1.0,
                            double gain_b = 1.0) {
  Frame f(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Eigen::Vector3d rgb =
          texture_rgb(seed, origin_x + x, origin_y + y);
      std::uint8_t* p = f.px(x, y);
      p[0] = quantize_channel(rgb(0) * gain_r);
      p[1] = quantize_channel(rgb(1) * gain_g);
      p[2] = quantize_channel(rgb(2) * gain_b);
    }
  }
  return f;
}

}  // namespace stitch::test
