#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <vector>

#include "stitch/frame.hpp"
#include "stitch/geometry.hpp"

namespace stitch {

/// Dense per-pixel displacement over an overlap region.
struct FlowField {
  int width = 0;
  int height = 0;
  PlaneF u;  // x displacement
  PlaneF v;  // y displacement

  static FlowField zero(int w, int h) {
    FlowField f;
    f.width = w;
    f.height = h;
    f.u = PlaneF::Zero(h, w);
    f.v = PlaneF::Zero(h, w);
    return f;
  }
};

struct FlowOptions {
  int levels = 4;
  int iterations = 50;
  double smoothness = 15.0;  // alpha on [0,255] intensities
  int threads = 1;           // row-parallel Jacobi sweeps, bit-identical
};

/// Pyramidal Horn-Schunck variational flow from region_a to region_b on
/// Rec. 601 luma, deterministic; the field is zeroed wherever either input
/// pixel is invalid. Throws ShapeMismatch on unequal dimensions and
/// TooSmall below 16x16.
FlowField dense_flow(const Frame& region_a, const Frame& region_b,
                     const FlowOptions& opts = {});

/// Per-pixel convex weights over the overlap, theta_i + theta_j = 1.
struct BlendWeights {
  int width = 0;
  int height = 0;
  PlaneF theta_i;
  PlaneF theta_j;
};

/// Positional feathering: theta_i = d_i / (d_i + d_j) where d_i is the
/// pixel's distance toward image j's exclusive zone, so weights reach 1
/// against each image's own side and cross at 0.5 mid-overlap. The masks are
/// full warped-frame masks on the shared canvas; weights are produced for
/// `bounds`.
BlendWeights blend_weights(const Frame& warped_i, const Frame& warped_j,
                           const Region& bounds);

enum class FuseWeighting {
  OwnWeightOnOwnFlow,   // sample i at x + theta_i * flow_ij (literal form)
  CrossWeightOnOwnFlow  // sample i at x + theta_j * flow_ij (meet-in-middle)
};

/// Flow-displaced weighted fusion of two equally sized overlap regions.
/// Invalid samples fall back to the other image at full weight; pixels valid
/// in neither stay invalid.
Frame flow_fuse(const Frame& region_i, const Frame& region_j,
                const FlowField& flow_ij, const FlowField& flow_ji,
                const BlendWeights& weights,
                FuseWeighting weighting = FuseWeighting::OwnWeightOnOwnFlow);

/// Weighted-mean composition: exclusive pixels copy, overlap pixels come
/// from the fused region, pixels valid in neither are invalid black.
Frame compose_panorama(const Frame& warped_i, const Frame& warped_j,
                       const Frame& fused_overlap, const Region& overlap);

/// Binary flow dump: two little-endian uint32 dims, then the u plane and the
/// v plane as row-major float32.
void write_flow(const std::filesystem::path& path, const FlowField& flow);
FlowField read_flow(const std::filesystem::path& path);

}  // namespace stitch
