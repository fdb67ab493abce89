#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <deque>

#include "stitch/histogram.hpp"

namespace stitch {

/// Per-channel 256-entry level remap from histogram specification.
/// Monotone nondecreasing by construction.
struct SpecificationLUT {
  std::array<std::array<std::uint8_t, 256>, 3> map{};

  static SpecificationLUT identity() {
    SpecificationLUT lut;
    for (int c = 0; c < 3; ++c)
      for (int v = 0; v < 256; ++v) lut.map[c][v] = static_cast<std::uint8_t>(v);
    return lut;
  }
};

/// 3x3 cross-channel transform applied to RGB row vectors (rgb' = rgb * m).
struct ColorMatrix {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  /// Smallest singular value of the normal matrix the solve saw; 0 for
  /// identity fallbacks.
  double min_singular = 0.0;

  static ColorMatrix identity() { return ColorMatrix{}; }
};

using PixelRows = Eigen::Matrix<double, Eigen::Dynamic, 3>;

/// Sliding window of paired pixel-row matrices for the temporal solve,
/// newest first. `source` holds the raw overlap rows of the frame being
/// corrected, `target` the specification-revised rows it should map to.
class TransferWindow {
 public:
  struct Entry {
    PixelRows source;
    PixelRows target;
  };

  explicit TransferWindow(int capacity = 3);

  void push(PixelRows source, PixelRows target);
  int size() const { return static_cast<int>(entries_.size()); }
  int capacity() const { return capacity_; }
  bool empty() const { return entries_.empty(); }
  const Entry& entry(int i) const { return entries_[i]; }  // 0 = newest

  /// Rows of all entries stacked (order: newest to oldest).
  Eigen::Index stacked_rows() const;

 private:
  int capacity_;
  std::deque<Entry> entries_;
};

/// CDF matching: LUT[v] = smallest level u with reference-CDF(u) >=
/// source-CDF(v). Comparisons are exact (integer cross-multiplication).
SpecificationLUT histogram_specification(const Histogram256& source_hist,
                                         const Histogram256& reference_hist);

/// Remaps valid pixels inside `region` per channel; everything else is
/// untouched.
Frame apply_lut(const Frame& frame, const Region& region,
                const SpecificationLUT& lut);

/// Least-squares M over the stacked window rows, via normal equations with a
/// singular-value guard. Throws RankDeficient when the normal matrix has
/// smallest singular value < 1e-8 * largest.
ColorMatrix solve_color_matrix(const TransferWindow& window);

/// rgb' = clamp(round(rgb * m)) for valid pixels inside `region`.
Frame apply_color_matrix(const Frame& frame, const Region& region,
                         const ColorMatrix& m);

/// Pixel rows of the jointly valid overlap pixels, raster order. `valid_with`
/// restricts rows to pixels also valid in that frame's region (regions must
/// have equal dimensions).
PixelRows gather_rows(const Frame& frame, const Region& region);

struct TransferResult {
  Frame corrected;        // source frame with the overlap corrected
  TransferWindow window;  // updated window (new pair pushed)
  ColorMatrix matrix;
  bool rank_deficient = false;  // solve degraded to identity
};

/// One spatio-temporal color-transfer step: histograms of both overlaps,
/// specification LUT (reference is the target map), LUT-revised source
/// overlap as the fit target, window update, matrix solve, and correction of
/// the source overlap. Overlap regions must have equal dimensions and
/// pixelwise correspondence (both sampled on the shared canvas grid).
TransferResult transfer_step(const Frame& source, const Frame& reference,
                             const Region& overlap_src,
                             const Region& overlap_ref,
                             const TransferWindow& window);

}  // namespace stitch
