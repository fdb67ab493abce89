#pragma once

#include <array>
#include <cstdint>

#include "stitch/frame.hpp"

namespace stitch {

/// Per-channel 256-bin counts over the valid pixels of some region. All
/// three channels count the same pixel set, so they share one total.
struct Histogram256 {
  std::array<std::array<std::uint32_t, 256>, 3> bins{};
  std::uint64_t total = 0;

  void add_rgb(const std::uint8_t* p) {
    ++bins[0][p[0]];
    ++bins[1][p[1]];
    ++bins[2][p[2]];
    ++total;
  }
};

/// Per-channel monotone CDF in [0, 1]; final entry is exactly 1.
struct Cdf256 {
  std::array<std::array<double, 256>, 3> values{};
};

/// Counts valid pixels of `region`. Throws EmptyRegion when the region is
/// empty, out of bounds, or fully masked out.
Histogram256 compute_histogram(const Frame& frame, const Region& region);

/// Throws EmptyHistogram on zero total.
Cdf256 cdf(const Histogram256& hist);

}  // namespace stitch
