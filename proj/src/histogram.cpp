#include "stitch/histogram.hpp"

namespace stitch {

Histogram256 compute_histogram(const Frame& frame, const Region& region) {
  check_region(frame, region);
  Histogram256 hist;
  for (int y = region.y0; y < region.y1; ++y) {
    for (int x = region.x0; x < region.x1; ++x) {
      if (!frame.valid_at(x, y)) continue;
      hist.add_rgb(frame.px(x, y));
    }
  }
  if (hist.total == 0) {
    throw StitchError(ErrorCode::EmptyRegion, "no valid pixels in region");
  }
  return hist;
}

Cdf256 cdf(const Histogram256& hist) {
  if (hist.total == 0) throw StitchError(ErrorCode::EmptyHistogram);
  Cdf256 out;
  for (int c = 0; c < 3; ++c) {
    std::uint64_t run = 0;
    for (int v = 0; v < 256; ++v) {
      run += hist.bins[c][v];
      // run/total of equal integers divides to exactly 1.0 at the end
      out.values[c][v] =
          static_cast<double>(run) / static_cast<double>(hist.total);
    }
  }
  return out;
}

}  // namespace stitch
