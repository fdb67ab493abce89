#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "stitch/frame.hpp"
#include "stitch/integral.hpp"

namespace stitch {

struct Keypoint {
  double x = 0.0;
  double y = 0.0;
  double scale = 0.0;     // detection sigma in pixels
  double response = 0.0;  // Hessian-determinant strength
};

/// Upright 64-dim descriptor (4x4 subregions x 4 Haar statistics), unit norm.
using Descriptor = Eigen::Matrix<float, 64, 1>;

struct MatchPair {
  int index_a = 0;
  int index_b = 0;
  double distance = 0.0;  // descriptor L2 distance
  double ax = 0.0, ay = 0.0;
  double bx = 0.0, by = 0.0;
};

struct RansacOptions {
  int iterations = 500;
  double inlier_px = 2.0;
  double min_scale = 0.5;
  double max_scale = 2.0;
  std::uint64_t seed = 0;
};

/// Axis-aligned scale plus translation, the parameter family the skew and
/// scale correction matrices compose from.
struct SimilarityParams {
  double s_x = 1.0;
  double s_y = 1.0;
  double t_x = 0.0;
  double t_y = 0.0;
};

/// Box-filter Hessian blob detection over >= 3 octaves inside `region`,
/// 3x3x3 non-max suppressed, sampling step 1. Deterministic ordering:
/// response descending, then y, then x. Throws RegionTooSmall below 32x32.
std::vector<Keypoint> detect(const Frame& frame, const Region& region,
                             double threshold = 2e-4);

/// One descriptor per keypoint; border samples clamp to the frame.
std::vector<Descriptor> describe(const Frame& frame,
                                 const std::vector<Keypoint>& keypoints);

/// Nearest-neighbor matching with ratio test (nearest/second < ratio) and a
/// symmetric cross-check.
std::vector<MatchPair> match(const std::vector<Descriptor>& desc_a,
                             const std::vector<Descriptor>& desc_b,
                             const std::vector<Keypoint>& kp_a,
                             const std::vector<Keypoint>& kp_b,
                             double ratio = 0.8);

struct ScaleTranslationFit {
  SimilarityParams params;
  std::vector<int> inliers;  // indices into the canonical-sorted match list
};

/// RANSAC over the 4-parameter family (x, y) -> (s_x*x + t_x, s_y*y + t_y),
/// least-squares refit on the consensus set. Matches are sorted canonically
/// first so the result only depends on the set and the seed. Throws
/// InsufficientMatches (< 2) or NoConsensus (< 50% and < 8 inliers).
ScaleTranslationFit ransac_scale_translation(std::vector<MatchPair> matches,
                                             const RansacOptions& opts);

}  // namespace stitch
