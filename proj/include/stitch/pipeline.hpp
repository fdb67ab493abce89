#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "stitch/color_balance.hpp"
#include "stitch/color_transfer.hpp"
#include "stitch/features.hpp"
#include "stitch/flow.hpp"
#include "stitch/geometry.hpp"
#include "stitch/report.hpp"

namespace stitch {

struct ViewSetup {
  std::string dir;  // frame directory; unused for in-memory runs
  CameraIntrinsics intrinsics;
  CameraExtrinsics extrinsics;
};

struct RefineOptions {
  bool enabled = true;
  double margin = 0.15;        // overlap broadening per side
  int ransac_iters = 500;
  double inlier_px = 2.0;
  double detect_threshold = 2e-4;
  double match_ratio = 0.8;
  int rerefine_every = 0;      // 0 = refine once at initialization
};

struct StitchConfig {
  std::vector<ViewSetup> views;  // 2 or 3
  int reference = 0;
  BalanceConfig balance;
  FlowOptions flow;
  RefineOptions refine;
  int threads = 1;
  std::uint64_t seed = 0;
  int window_capacity = 3;  // 1 reproduces the single-pair solve
  FuseWeighting fuse_weighting = FuseWeighting::OwnWeightOnOwnFlow;
  std::string scene_id = "scene";
};

/// All temporal and geometric state the sequencer owns between frames.
struct PipelineState {
  StitchConfig config;
  CanvasGeometry canvas;
  std::vector<Homography> warp_maps;  // per view, source -> reference plane

  struct PairState {
    int view = 0;  // the non-reference view of the pair
    Region bounds;  // tight overlap bbox on the canvas
    BlendWeights weights;
    TransferWindow window{3};
    bool refine_warning = false;  // kept the unrefined map
  };
  std::vector<PairState> pairs;

  std::vector<BalanceThresholds> threshold_history;  // raw, newest last, <= 3
  long frame_counter = 0;
};

struct ProcessResult {
  Frame panorama;
  FrameReport report;
};

/// Builds camera homographies, warps the first frames, extracts and broadens
/// the overlaps, and refines the pairwise maps by feature matching. Throws
/// ConfigurationError for invalid view setups or disjoint fields of view.
PipelineState initialize(const StitchConfig& config,
                         const std::vector<Frame>& first_frames);

/// One frame through the stage order: geometric warping, color correction,
/// local warping, blending, then global balancing. Stage failures degrade
/// (identity matrix, zero flow) and are recorded, never fatal.
ProcessResult process_frame(PipelineState& state,
                            const std::vector<Frame>& frames);

struct RunResult {
  std::vector<Frame> panoramas;  // empty when a sink consumes them
  RunReport report;
};

/// Sequential over frames, data-parallel within each frame; output is
/// byte-identical for any thread count. A sink, when given, receives each
/// panorama instead of accumulating them.
RunResult run_sequence(
    const StitchConfig& config, const std::vector<std::vector<Frame>>& views,
    const std::function<void(long, const Frame&)>& sink = {});

}  // namespace stitch
