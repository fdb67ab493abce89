#include "stitch/geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace stitch {

void check_rotation(const Eigen::Matrix3d& r) {
  const double ortho = (r * r.transpose() - Eigen::Matrix3d::Identity()).norm();
  if (ortho >= 1e-6 || r.determinant() < 0.0) {
    throw StitchError(ErrorCode::ConfigError,
                      "rotation must be orthonormal with det +1");
  }
}

Homography Homography::from_matrix(const Eigen::Matrix3d& m,
                                   HomographyProvenance prov) {
  Homography out;
  out.h = m;
  if (std::abs(out.h(2, 2)) > 1e-12) out.h /= out.h(2, 2);
  if (std::abs(out.h.determinant()) <= 1e-12) {
    throw StitchError(ErrorCode::SingularHomography);
  }
  out.provenance = prov;
  return out;
}

Homography Homography::inverse() const {
  return from_matrix(h.inverse(), provenance);
}

Eigen::Vector2d Homography::apply(const Eigen::Vector2d& p) const {
  const Eigen::Vector3d q = h * Eigen::Vector3d(p.x(), p.y(), 1.0);
  return q.hnormalized();
}

Homography planar_homography(const CameraIntrinsics& intr,
                             const CameraExtrinsics& extr) {
  check_rotation(extr.rotation);
  Eigen::Matrix3d plane_cols;
  plane_cols.col(0) = extr.rotation.col(0);
  plane_cols.col(1) = extr.rotation.col(1);
  plane_cols.col(2) = extr.translation;
  const Eigen::Matrix3d h = intr.k() * plane_cols;
  if (std::abs(h.determinant()) <= 1e-12) {
    throw StitchError(ErrorCode::DegeneratePose,
                      "camera is degenerate for the world plane");
  }
  return Homography::from_matrix(h, HomographyProvenance::Camera);
}

Homography pairwise_homography(const Homography& h_i, const Homography& h_j) {
  return Homography::from_matrix(h_i.h * h_j.h.inverse(),
                                 HomographyProvenance::Camera);
}

Frame warp_frame(const Frame& frame, const Homography& h, int canvas_width,
                 int canvas_height, const Eigen::Vector2d& canvas_offset) {
  const Eigen::Matrix3d inv = h.h.inverse();
  Frame out = Frame::with_mask(canvas_width, canvas_height, 0, 0);
  bool any = false;
  for (int y = 0; y < canvas_height; ++y) {
    for (int x = 0; x < canvas_width; ++x) {
      const Eigen::Vector3d src = inv * Eigen::Vector3d(x + canvas_offset.x(),
                                                        y + canvas_offset.y(),
                                                        1.0);
      if (std::abs(src.z()) < 1e-12) continue;
      const double sx = src.x() / src.z();
      const double sy = src.y() / src.z();
      const BilinearSample s = sample_bilinear(frame, sx, sy);
      if (!s.valid) continue;
      std::uint8_t* p = out.px(x, y);
      p[0] = quantize_channel(s.rgb(0));
      p[1] = quantize_channel(s.rgb(1));
      p[2] = quantize_channel(s.rgb(2));
      out.mask[out.index(x, y)] = 1;
      any = true;
    }
  }
  if (!any) throw StitchError(ErrorCode::EmptyProjection);
  return out;
}

OverlapInfo overlap_regions(const Frame& warped_i, const Frame& warped_j) {
  if (warped_i.width != warped_j.width || warped_i.height != warped_j.height) {
    throw StitchError(ErrorCode::ShapeMismatch,
                      "warped frames must share the canvas");
  }
  int x0 = warped_i.width;
  int y0 = warped_i.height;
  int x1 = 0;
  int y1 = 0;
  for (int y = 0; y < warped_i.height; ++y) {
    for (int x = 0; x < warped_i.width; ++x) {
      if (warped_i.valid_at(x, y) && warped_j.valid_at(x, y)) {
        x0 = std::min(x0, x);
        y0 = std::min(y0, y);
        x1 = std::max(x1, x + 1);
        y1 = std::max(y1, y + 1);
      }
    }
  }
  if (x1 <= x0 || y1 <= y0) throw StitchError(ErrorCode::NoOverlap);
  OverlapInfo info;
  info.bounds = Region{x0, y0, x1, y1};
  info.both.assign(info.bounds.area(), 0);
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      if (warped_i.valid_at(x, y) && warped_j.valid_at(x, y)) {
        info.both[static_cast<std::size_t>(y - y0) * info.bounds.width() +
                  (x - x0)] = 1;
      }
    }
  }
  return info;
}

Region broaden(const Region& region, double margin_fraction,
               const Region& bounds) {
  if (margin_fraction < 0.0) {
    throw StitchError(ErrorCode::ConfigError, "margin must be >= 0");
  }
  const int mx = static_cast<int>(std::lround(margin_fraction * region.width()));
  const int my =
      static_cast<int>(std::lround(margin_fraction * region.height()));
  Region out;
  out.x0 = std::max(bounds.x0, region.x0 - mx);
  out.y0 = std::max(bounds.y0, region.y0 - my);
  out.x1 = std::min(bounds.x1, region.x1 + mx);
  out.y1 = std::min(bounds.y1, region.y1 + my);
  return out;
}

Homography refine_homography(const Homography& h_ij,
                             const SimilarityParams& params) {
  Eigen::Matrix3d skew = Eigen::Matrix3d::Identity();
  skew(0, 2) = params.t_x;
  skew(1, 2) = params.t_y;
  Eigen::Matrix3d scale = Eigen::Matrix3d::Identity();
  scale(0, 0) = params.s_x;
  scale(1, 1) = params.s_y;
  return Homography::from_matrix(skew * h_ij.h * scale,
                                 HomographyProvenance::Refined);
}

CanvasGeometry compute_canvas(const std::vector<Homography>& maps,
                              const std::vector<std::pair<int, int>>& sizes) {
  double min_x = std::numeric_limits<double>::max();
  double min_y = std::numeric_limits<double>::max();
  double max_x = std::numeric_limits<double>::lowest();
  double max_y = std::numeric_limits<double>::lowest();
  for (std::size_t v = 0; v < maps.size(); ++v) {
    const double w = sizes[v].first - 1.0;
    const double h = sizes[v].second - 1.0;
    const Eigen::Vector2d corners[4] = {
        {0.0, 0.0}, {w, 0.0}, {0.0, h}, {w, h}};
    for (const auto& corner : corners) {
      const Eigen::Vector2d p = maps[v].apply(corner);
      min_x = std::min(min_x, p.x());
      min_y = std::min(min_y, p.y());
      max_x = std::max(max_x, p.x());
      max_y = std::max(max_y, p.y());
    }
  }
  CanvasGeometry canvas;
  canvas.offset = Eigen::Vector2d(std::floor(min_x), std::floor(min_y));
  canvas.width = static_cast<int>(std::ceil(max_x) - canvas.offset.x()) + 1;
  canvas.height = static_cast<int>(std::ceil(max_y) - canvas.offset.y()) + 1;
  return canvas;
}

}  // namespace stitch
