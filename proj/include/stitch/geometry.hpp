#pragma once

#include <Eigen/Core>
#include <vector>

#include "stitch/features.hpp"
#include "stitch/frame.hpp"

namespace stitch {

struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  Eigen::Matrix3d k() const {
    Eigen::Matrix3d m;
    m << fx, 0, cx, 0, fy, cy, 0, 0, 1;
    return m;
  }
};

struct CameraExtrinsics {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
};

/// Validates ||R*R^T - I|| < 1e-6 and det R = +1.
void check_rotation(const Eigen::Matrix3d& r);

enum class HomographyProvenance { Camera, Refined, Identity, External };

/// 3x3 projective map, normalized so h(2,2) = 1 whenever that entry is
/// nonzero. Construction rejects singular matrices.
struct Homography {
  Eigen::Matrix3d h = Eigen::Matrix3d::Identity();
  HomographyProvenance provenance = HomographyProvenance::Identity;

  static Homography from_matrix(const Eigen::Matrix3d& m,
                                HomographyProvenance prov);
  static Homography identity() { return Homography{}; }

  Homography inverse() const;

  /// Applies the map to a point (homogeneous normalization included).
  Eigen::Vector2d apply(const Eigen::Vector2d& p) const;
};

/// World-plane (Z_W = 0) homography K * [r1 r2 t], mapping plane points
/// (X, Y, 1) to image pixels.
Homography planar_homography(const CameraIntrinsics& intr,
                             const CameraExtrinsics& extr);

/// Normalized product h_i * h_j^{-1}. With the planar convention above this
/// carries points of image j into image i.
Homography pairwise_homography(const Homography& h_i, const Homography& h_j);

/// Inverse-maps every canvas pixel through h and bilinear-samples the source.
/// Canvas pixel (x, y) corresponds to plane coordinate (x + offset_x,
/// y + offset_y). The result carries a mask; throws EmptyProjection when
/// nothing lands inside the source.
Frame warp_frame(const Frame& frame, const Homography& h, int canvas_width,
                 int canvas_height, const Eigen::Vector2d& canvas_offset);

struct OverlapInfo {
  Region bounds;                   // tight bbox of the mask intersection
  std::vector<std::uint8_t> both;  // bounds-sized intersection mask
  bool both_at(int dx, int dy) const {
    return both[static_cast<std::size_t>(dy) * bounds.width() + dx] != 0;
  }
};

/// Intersection of two canvas masks. Throws NoOverlap when empty, or
/// ShapeMismatch when the canvases differ.
OverlapInfo overlap_regions(const Frame& warped_i, const Frame& warped_j);

/// Region grown by margin_fraction of its width/height per side, clamped.
Region broaden(const Region& region, double margin_fraction,
               const Region& bounds);

/// Eq.-14 style refinement: translation(t_x, t_y) * h_ij * scale(s_x, s_y).
Homography refine_homography(const Homography& h_ij,
                             const SimilarityParams& params);

struct CanvasGeometry {
  int width = 0;
  int height = 0;
  Eigen::Vector2d offset = Eigen::Vector2d::Zero();  // plane coord of pixel (0,0)
};

/// Bounding box of all frame corners projected through their homographies,
/// so no content is cropped.
CanvasGeometry compute_canvas(const std::vector<Homography>& maps,
                              const std::vector<std::pair<int, int>>& sizes);

}  // namespace stitch
