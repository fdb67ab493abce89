#include "stitch/color_transfer.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace stitch {

TransferWindow::TransferWindow(int capacity) : capacity_(capacity) {
  if (capacity_ < 1) capacity_ = 1;
  if (capacity_ > 3) capacity_ = 3;
}

void TransferWindow::push(PixelRows source, PixelRows target) {
  if (source.rows() != target.rows()) {
    throw StitchError(ErrorCode::ShapeMismatch,
                      "paired pixel matrices must have equal row counts");
  }
  entries_.push_front(Entry{std::move(source), std::move(target)});
  while (static_cast<int>(entries_.size()) > capacity_) entries_.pop_back();
}

Eigen::Index TransferWindow::stacked_rows() const {
  Eigen::Index n = 0;
  for (const auto& e : entries_) n += e.source.rows();
  return n;
}

SpecificationLUT histogram_specification(const Histogram256& source_hist,
                                         const Histogram256& reference_hist) {
  if (source_hist.total == 0 || reference_hist.total == 0) {
    throw StitchError(ErrorCode::EmptyHistogram);
  }
  SpecificationLUT lut;
  for (int c = 0; c < 3; ++c) {
    std::uint64_t cum_ref[256];
    std::uint64_t run = 0;
    for (int v = 0; v < 256; ++v) {
      run += reference_hist.bins[c][v];
      cum_ref[v] = run;
    }
    std::uint64_t cum_src = 0;
    int u = 0;
    for (int v = 0; v < 256; ++v) {
      cum_src += source_hist.bins[c][v];
      // smallest u with refCDF(u) >= srcCDF(v), compared exactly:
      // cum_ref[u] * total_src >= cum_src * total_ref
      while (u < 255 &&
             cum_ref[u] * source_hist.total < cum_src * reference_hist.total) {
        ++u;
      }
      lut.map[c][v] = static_cast<std::uint8_t>(u);
    }
  }
  return lut;
}

Frame apply_lut(const Frame& frame, const Region& region,
                const SpecificationLUT& lut) {
  check_region(frame, region);
  Frame out = frame;
  for (int y = region.y0; y < region.y1; ++y) {
    for (int x = region.x0; x < region.x1; ++x) {
      if (!frame.valid_at(x, y)) continue;
      std::uint8_t* p = out.px(x, y);
      p[0] = lut.map[0][p[0]];
      p[1] = lut.map[1][p[1]];
      p[2] = lut.map[2][p[2]];
    }
  }
  return out;
}

ColorMatrix solve_color_matrix(const TransferWindow& window) {
  if (window.empty()) {
    throw StitchError(ErrorCode::MissingState, "empty transfer window");
  }
  const Eigen::Index n = window.stacked_rows();
  PixelRows x(n, 3);
  PixelRows y(n, 3);
  Eigen::Index row = 0;
  for (int i = 0; i < window.size(); ++i) {
    const auto& e = window.entry(i);
    x.middleRows(row, e.source.rows()) = e.source;
    y.middleRows(row, e.target.rows()) = e.target;
    row += e.source.rows();
  }

  const Eigen::Matrix3d normal = x.transpose() * x;
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(normal);
  const auto& sv = svd.singularValues();
  if (n < 3 || sv(2) < 1e-8 * sv(0)) {
    throw StitchError(ErrorCode::RankDeficient,
                      "normal matrix is rank deficient");
  }
  ColorMatrix out;
  out.m = normal.ldlt().solve(x.transpose() * y);
  out.min_singular = sv(2);
  return out;
}

Frame apply_color_matrix(const Frame& frame, const Region& region,
                         const ColorMatrix& m) {
  check_region(frame, region);
  Frame out = frame;
  for (int y = region.y0; y < region.y1; ++y) {
    for (int x = region.x0; x < region.x1; ++x) {
      if (!frame.valid_at(x, y)) continue;
      std::uint8_t* p = out.px(x, y);
      const Eigen::RowVector3d rgb(p[0], p[1], p[2]);
      const Eigen::RowVector3d mapped = rgb * m.m;
      p[0] = quantize_channel(mapped(0));
      p[1] = quantize_channel(mapped(1));
      p[2] = quantize_channel(mapped(2));
    }
  }
  return out;
}

PixelRows gather_rows(const Frame& frame, const Region& region) {
  check_region(frame, region);
  PixelRows rows(region.area(), 3);
  Eigen::Index n = 0;
  for (int y = region.y0; y < region.y1; ++y) {
    for (int x = region.x0; x < region.x1; ++x) {
      if (!frame.valid_at(x, y)) continue;
      const std::uint8_t* p = frame.px(x, y);
      rows.row(n++) << p[0], p[1], p[2];
    }
  }
  return rows.topRows(n).eval();
}

TransferResult transfer_step(const Frame& source, const Frame& reference,
                             const Region& overlap_src,
                             const Region& overlap_ref,
                             const TransferWindow& window) {
  check_region(source, overlap_src);
  check_region(reference, overlap_ref);
  if (overlap_src.width() != overlap_ref.width() ||
      overlap_src.height() != overlap_ref.height()) {
    throw StitchError(ErrorCode::ShapeMismatch,
                      "overlap regions must have equal dimensions");
  }

  // Jointly valid pixels keep the row pairing exact; pixels seen by only one
  // frame contribute neither to the histograms nor to the fit.
  Histogram256 hist_src;
  Histogram256 hist_ref;
  PixelRows raw(overlap_src.area(), 3);
  Eigen::Index n = 0;
  for (int dy = 0; dy < overlap_src.height(); ++dy) {
    for (int dx = 0; dx < overlap_src.width(); ++dx) {
      const int sx = overlap_src.x0 + dx;
      const int sy = overlap_src.y0 + dy;
      const int rx = overlap_ref.x0 + dx;
      const int ry = overlap_ref.y0 + dy;
      if (!source.valid_at(sx, sy) || !reference.valid_at(rx, ry)) continue;
      hist_src.add_rgb(source.px(sx, sy));
      hist_ref.add_rgb(reference.px(rx, ry));
      const std::uint8_t* p = source.px(sx, sy);
      raw.row(n++) << p[0], p[1], p[2];
    }
  }
  if (n == 0) {
    throw StitchError(ErrorCode::EmptyRegion, "no jointly valid overlap pixels");
  }
  raw.conservativeResize(n, Eigen::NoChange);

  const SpecificationLUT lut = histogram_specification(hist_src, hist_ref);

  // The specification-revised source rows are the fit target, so the matrix
  // approximates the per-frame LUT while the window smooths it over time.
  PixelRows revised(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) {
      revised(i, c) = lut.map[c][static_cast<int>(raw(i, c))];
    }
  }

  TransferResult result{Frame{}, window, ColorMatrix::identity(), false};
  result.window.push(std::move(raw), std::move(revised));
  try {
    result.matrix = solve_color_matrix(result.window);
  } catch (const StitchError& e) {
    if (e.code() != ErrorCode::RankDeficient) throw;
    result.matrix = ColorMatrix::identity();
    result.rank_deficient = true;
  }
  result.corrected = apply_color_matrix(source, overlap_src, result.matrix);
  return result;
}

}  // namespace stitch
