#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "stitch/histogram.hpp"

namespace stitch {

/// Dark/bright cut levels per channel, from the lambda / 1-lambda points of
/// the frame histogram.
struct BalanceThresholds {
  std::array<int, 3> m1{};
  std::array<int, 3> m2{};
  long frame_index = 0;
};

struct BalanceConfig {
  double lambda = 0.05;
  double gamma_dark = 1.5;
  double gamma_bright = 1.5;
  int target_black = 0;
  int target_white = 255;
};

/// Per-channel 256-entry tone curve, monotone nondecreasing.
struct ToneLUT {
  std::array<std::array<std::uint8_t, 256>, 3> map{};

  static ToneLUT identity() {
    ToneLUT lut;
    for (int c = 0; c < 3; ++c)
      for (int v = 0; v < 256; ++v) lut.map[c][v] = static_cast<std::uint8_t>(v);
    return lut;
  }
};

/// m1 = smallest level with CDF >= lambda, m2 = smallest with CDF >= 1-lambda.
BalanceThresholds find_thresholds(const Histogram256& hist, double lambda);

/// Arithmetic mean per channel over the available history (1 entry for the
/// first frame, 2 for the second, 3 thereafter), newest last; rounded to the
/// nearest level, with m1 <= m2 restored by swapping if rounding crosses.
BalanceThresholds smooth_thresholds(
    const std::vector<BalanceThresholds>& history);

/// Piecewise gamma / linear / gamma curve through the threshold anchors.
/// Anchor values sit on the straight line between the black and white
/// targets, which makes the curve continuous, monotone, and the exact
/// identity for gamma 1 with targets (0, 255). Equal thresholds degrade to
/// the global linear curve.
ToneLUT build_curve(const BalanceThresholds& th, const BalanceConfig& cfg);

/// Real-valued curve behind build_curve, for one channel; exposed so tests
/// can evaluate it densely.
double balance_curve_value(double x, int m1, int m2, const BalanceConfig& cfg);

/// Per-channel table lookup over all valid pixels.
Frame apply_balance(const Frame& frame, const ToneLUT& lut);

}  // namespace stitch
