#pragma once

#include <cstdint>
#include <vector>

#include "stitch/frame.hpp"

namespace stitch {

/// (width+1) x (height+1) cumulative grayscale sums with squared sums, for
/// O(1) box queries. Grayscale is Rec. 601 luma rounded to 8 bits so all
/// arithmetic stays exact in integers.
class IntegralImage {
 public:
  IntegralImage() = default;
  explicit IntegralImage(const Frame& frame);
  explicit IntegralImage(const PlaneF& gray8);  // values expected in [0,255]

  int width() const { return width_; }
  int height() const { return height_; }

  /// Sum over the half-open box [x0, x1) x [y0, y1); coordinates are clamped
  /// to the image so oversized boxes behave like zero-padded borders.
  std::uint64_t box_sum(int x0, int y0, int x1, int y1) const;
  std::uint64_t box_sum_squares(int x0, int y0, int x1, int y1) const;

  /// Population variance of the box, 0 for empty boxes.
  double box_variance(int x0, int y0, int x1, int y1) const;

 private:
  void build(const PlaneF& gray8);
  std::uint64_t at(const std::vector<std::uint64_t>& t, int x, int y) const {
    return t[static_cast<std::size_t>(y) * (width_ + 1) + x];
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint64_t> sum_;
  std::vector<std::uint64_t> sq_;
};

}  // namespace stitch
