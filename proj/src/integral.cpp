#include "stitch/integral.hpp"

#include <algorithm>
#include <cmath>

namespace stitch {

IntegralImage::IntegralImage(const Frame& frame) {
  PlaneF gray(frame.height, frame.width);
  for (int y = 0; y < frame.height; ++y) {
    for (int x = 0; x < frame.width; ++x) {
      const std::uint8_t* p = frame.px(x, y);
      gray(y, x) = static_cast<float>(
          quantize_channel(0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]));
    }
  }
  build(gray);
}

IntegralImage::IntegralImage(const PlaneF& gray8) { build(gray8); }

void IntegralImage::build(const PlaneF& gray8) {
  width_ = static_cast<int>(gray8.cols());
  height_ = static_cast<int>(gray8.rows());
  const std::size_t stride = width_ + 1;
  sum_.assign(stride * (height_ + 1), 0);
  sq_.assign(stride * (height_ + 1), 0);
  for (int y = 0; y < height_; ++y) {
    std::uint64_t row = 0;
    std::uint64_t row_sq = 0;
    for (int x = 0; x < width_; ++x) {
      const auto v = static_cast<std::uint64_t>(std::lround(gray8(y, x)));
      row += v;
      row_sq += v * v;
      sum_[(y + 1) * stride + (x + 1)] = sum_[y * stride + (x + 1)] + row;
      sq_[(y + 1) * stride + (x + 1)] = sq_[y * stride + (x + 1)] + row_sq;
    }
  }
}

std::uint64_t IntegralImage::box_sum(int x0, int y0, int x1, int y1) const {
  x0 = std::clamp(x0, 0, width_);
  x1 = std::clamp(x1, 0, width_);
  y0 = std::clamp(y0, 0, height_);
  y1 = std::clamp(y1, 0, height_);
  if (x1 <= x0 || y1 <= y0) return 0;
  return at(sum_, x1, y1) - at(sum_, x0, y1) - at(sum_, x1, y0) +
         at(sum_, x0, y0);
}

std::uint64_t IntegralImage::box_sum_squares(int x0, int y0, int x1,
                                             int y1) const {
  x0 = std::clamp(x0, 0, width_);
  x1 = std::clamp(x1, 0, width_);
  y0 = std::clamp(y0, 0, height_);
  y1 = std::clamp(y1, 0, height_);
  if (x1 <= x0 || y1 <= y0) return 0;
  return at(sq_, x1, y1) - at(sq_, x0, y1) - at(sq_, x1, y0) + at(sq_, x0, y0);
}

double IntegralImage::box_variance(int x0, int y0, int x1, int y1) const {
  const double n = static_cast<double>(
      std::max(0, std::min(x1, width_) - std::max(x0, 0)) *
      static_cast<long long>(
          std::max(0, std::min(y1, height_) - std::max(y0, 0))));
  if (n <= 0) return 0.0;
  const double s = static_cast<double>(box_sum(x0, y0, x1, y1));
  const double ss = static_cast<double>(box_sum_squares(x0, y0, x1, y1));
  const double mean = s / n;
  return std::max(0.0, ss / n - mean * mean);
}

}  // namespace stitch
