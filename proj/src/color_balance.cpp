#include "stitch/color_balance.hpp"

#include <algorithm>
#include <cmath>

namespace stitch {

BalanceThresholds find_thresholds(const Histogram256& hist, double lambda) {
  if (hist.total == 0) throw StitchError(ErrorCode::EmptyHistogram);
  if (!(lambda > 0.0 && lambda < 0.5)) {
    throw StitchError(ErrorCode::ConfigError, "lambda must be in (0, 0.5)");
  }
  BalanceThresholds th;
  const double total = static_cast<double>(hist.total);
  for (int c = 0; c < 3; ++c) {
    std::uint64_t run = 0;
    int m1 = 255;
    int m2 = 255;
    bool have_m1 = false;
    bool have_m2 = false;
    for (int v = 0; v < 256; ++v) {
      run += hist.bins[c][v];
      const double cdf = static_cast<double>(run) / total;
      if (!have_m1 && cdf >= lambda) {
        m1 = v;
        have_m1 = true;
      }
      if (!have_m2 && cdf >= 1.0 - lambda) {
        m2 = v;
        have_m2 = true;
        break;
      }
    }
    th.m1[c] = m1;
    th.m2[c] = m2;
  }
  return th;
}

BalanceThresholds smooth_thresholds(
    const std::vector<BalanceThresholds>& history) {
  if (history.empty()) {
    throw StitchError(ErrorCode::MissingState, "empty threshold history");
  }
  const std::size_t n = std::min<std::size_t>(history.size(), 3);
  const std::size_t start = history.size() - n;
  BalanceThresholds out;
  out.frame_index = history.back().frame_index;
  for (int c = 0; c < 3; ++c) {
    double s1 = 0.0;
    double s2 = 0.0;
    for (std::size_t i = start; i < history.size(); ++i) {
      s1 += history[i].m1[c];
      s2 += history[i].m2[c];
    }
    int m1 = static_cast<int>(std::lround(s1 / static_cast<double>(n)));
    int m2 = static_cast<int>(std::lround(s2 / static_cast<double>(n)));
    if (m1 > m2) std::swap(m1, m2);
    out.m1[c] = m1;
    out.m2[c] = m2;
  }
  return out;
}

double balance_curve_value(double x, int m1, int m2,
                           const BalanceConfig& cfg) {
  const double tb = cfg.target_black;
  const double tw = cfg.target_white;
  if (m1 >= m2) {
    // Degenerate thresholds: single global linear segment.
    return tb + (tw - tb) * (x / 255.0);
  }
  // Anchors on the black-to-white line, so gamma 1 collapses to identity.
  const double lm1 = tb + (tw - tb) * (static_cast<double>(m1) / 255.0);
  const double lm2 = tb + (tw - tb) * (static_cast<double>(m2) / 255.0);
  if (x <= m1) {
    if (m1 == 0) return tb;
    return tb + (lm1 - tb) * std::pow(x / m1, cfg.gamma_dark);
  }
  if (x >= m2) {
    if (m2 == 255) return tw;
    return lm2 +
           (tw - lm2) * std::pow((x - m2) / (255.0 - m2), cfg.gamma_bright);
  }
  return lm1 + (lm2 - lm1) * (x - m1) / (m2 - m1);
}

ToneLUT build_curve(const BalanceThresholds& th, const BalanceConfig& cfg) {
  if (!(cfg.gamma_dark > 0.0 && cfg.gamma_bright > 0.0)) {
    throw StitchError(ErrorCode::ConfigError, "gammas must be positive");
  }
  if (cfg.target_black > cfg.target_white) {
    throw StitchError(ErrorCode::ConfigError,
                      "target_black must not exceed target_white");
  }
  ToneLUT lut;
  for (int c = 0; c < 3; ++c) {
    for (int v = 0; v < 256; ++v) {
      lut.map[c][v] = quantize_channel(
          balance_curve_value(static_cast<double>(v), th.m1[c], th.m2[c], cfg));
    }
  }
  return lut;
}

Frame apply_balance(const Frame& frame, const ToneLUT& lut) {
  Frame out = frame;
  for (int y = 0; y < frame.height; ++y) {
    for (int x = 0; x < frame.width; ++x) {
      if (!frame.valid_at(x, y)) continue;
      std::uint8_t* p = out.px(x, y);
      p[0] = lut.map[0][p[0]];
      p[1] = lut.map[1][p[1]];
      p[2] = lut.map[2][p[2]];
    }
  }
  return out;
}

}  // namespace stitch
