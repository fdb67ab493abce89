#include "stitch/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>

#include "stitch/parallel.hpp"

namespace stitch {

const std::array<const char*, kStageCount> kStageNames = {
    "Geometric Warping", "Color Correction", "Local Warping",
    "Image Blending"};

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void validate_config(const StitchConfig& config) {
  const int n = static_cast<int>(config.views.size());
  if (n < 2 || n > 3) {
    throw StitchError(ErrorCode::ConfigurationError,
                      "pipeline supports 2 or 3 views");
  }
  if (config.reference < 0 || config.reference >= n) {
    throw StitchError(ErrorCode::ConfigurationError,
                      "reference view index out of range");
  }
}

// Row-banded variant of warp_frame; bands are disjoint so the result is
// bit-identical to the sequential op.
Frame warp_frame_parallel(const Frame& frame, const Homography& h,
                          const CanvasGeometry& canvas, int threads) {
  const Eigen::Matrix3d inv = h.h.inverse();
  Frame out = Frame::with_mask(canvas.width, canvas.height, 0, 0);
  std::atomic<bool> any{false};
  parallel_for(canvas.height, threads, [&](long y0, long y1) {
    bool local_any = false;
    for (long y = y0; y < y1; ++y) {
      for (int x = 0; x < canvas.width; ++x) {
        const Eigen::Vector3d src =
            inv * Eigen::Vector3d(x + canvas.offset.x(), y + canvas.offset.y(),
                                  1.0);
        if (std::abs(src.z()) < 1e-12) continue;
        const BilinearSample s =
            sample_bilinear(frame, src.x() / src.z(), src.y() / src.z());
        if (!s.valid) continue;
        std::uint8_t* p = out.px(x, static_cast<int>(y));
        p[0] = quantize_channel(s.rgb(0));
        p[1] = quantize_channel(s.rgb(1));
        p[2] = quantize_channel(s.rgb(2));
        out.mask[out.index(x, static_cast<int>(y))] = 1;
        local_any = true;
      }
    }
    if (local_any) any.store(true, std::memory_order_relaxed);
  });
  if (!any.load()) throw StitchError(ErrorCode::EmptyProjection);
  return out;
}

void apply_matrix_rows(Frame& frame, const ColorMatrix& m, int threads) {
  parallel_for(frame.height, threads, [&](long y0, long y1) {
    for (long y = y0; y < y1; ++y) {
      for (int x = 0; x < frame.width; ++x) {
        if (!frame.valid_at(x, static_cast<int>(y))) continue;
        std::uint8_t* p = frame.px(x, static_cast<int>(y));
        const Eigen::RowVector3d rgb(p[0], p[1], p[2]);
        const Eigen::RowVector3d mapped = rgb * m.m;
        p[0] = quantize_channel(mapped(0));
        p[1] = quantize_channel(mapped(1));
        p[2] = quantize_channel(mapped(2));
      }
    }
  });
}

void apply_tone_rows(Frame& frame, const ToneLUT& lut, int threads) {
  parallel_for(frame.height, threads, [&](long y0, long y1) {
    for (long y = y0; y < y1; ++y) {
      for (int x = 0; x < frame.width; ++x) {
        if (!frame.valid_at(x, static_cast<int>(y))) continue;
        std::uint8_t* p = frame.px(x, static_cast<int>(y));
        p[0] = lut.map[0][p[0]];
        p[1] = lut.map[1][p[1]];
        p[2] = lut.map[2][p[2]];
      }
    }
  });
}

Eigen::Matrix2d local_jacobian(const Homography& h, const Eigen::Vector2d& at) {
  const double eps = 1e-4;
  const Eigen::Vector2d dx =
      (h.apply(at + Eigen::Vector2d(eps, 0)) -
       h.apply(at - Eigen::Vector2d(eps, 0))) /
      (2 * eps);
  const Eigen::Vector2d dy =
      (h.apply(at + Eigen::Vector2d(0, eps)) -
       h.apply(at - Eigen::Vector2d(0, eps))) /
      (2 * eps);
  Eigen::Matrix2d j;
  j.col(0) = dx;
  j.col(1) = dy;
  return j;
}

// Refines one pairwise map from feature matches on the broadened overlap.
// Both keypoint sets are back-projected into the view's source coordinates,
// where residual intrinsic error is an exact scale + translation; the fitted
// translation is transported to the plane side with the local Jacobian so
// the correction composes as translation * H * scale.
void refine_pair(PipelineState& state, const std::vector<Frame>& warped,
                 PipelineState::PairState& pair) {
  const StitchConfig& cfg = state.config;
  const Frame& wv = warped[pair.view];
  const Frame& wr = warped[cfg.reference];

  const Region canvas_region{0, 0, state.canvas.width, state.canvas.height};
  const Region search = broaden(pair.bounds, cfg.refine.margin, canvas_region);
  pair.refine_warning = true;

  try {
    const auto kp_v = detect(wv, search, cfg.refine.detect_threshold);
    const auto kp_r = detect(wr, search, cfg.refine.detect_threshold);
    if (kp_v.empty() || kp_r.empty()) return;
    const auto d_v = describe(wv, kp_v);
    const auto d_r = describe(wr, kp_r);
    auto matches = match(d_v, d_r, kp_v, kp_r, cfg.refine.match_ratio);

    const Homography& map = state.warp_maps[pair.view];
    const Homography inv = map.inverse();
    for (auto& m : matches) {
      const Eigen::Vector2d q = inv.apply(
          Eigen::Vector2d(m.ax + state.canvas.offset.x(),
                          m.ay + state.canvas.offset.y()));
      const Eigen::Vector2d p = inv.apply(
          Eigen::Vector2d(m.bx + state.canvas.offset.x(),
                          m.by + state.canvas.offset.y()));
      m.ax = q.x();
      m.ay = q.y();
      m.bx = p.x();
      m.by = p.y();
    }

    RansacOptions opts;
    opts.iterations = cfg.refine.ransac_iters;
    opts.inlier_px = cfg.refine.inlier_px;
    opts.seed = cfg.seed + static_cast<std::uint64_t>(pair.view);
    const ScaleTranslationFit fit = ransac_scale_translation(matches, opts);

    // Source-side centroid of the overlap, for the translation transport.
    const Eigen::Vector2d centre(
        state.canvas.offset.x() + pair.bounds.x0 + pair.bounds.width() / 2.0,
        state.canvas.offset.y() + pair.bounds.y0 + pair.bounds.height() / 2.0);
    const Eigen::Matrix2d jac = local_jacobian(map, inv.apply(centre));
    const Eigen::Vector2d t_plane =
        jac * Eigen::Vector2d(fit.params.t_x, fit.params.t_y);

    SimilarityParams params = fit.params;
    params.t_x = t_plane.x();
    params.t_y = t_plane.y();
    state.warp_maps[pair.view] = refine_homography(map, params);
    pair.refine_warning = false;
  } catch (const StitchError& e) {
    if (e.code() != ErrorCode::NoConsensus &&
        e.code() != ErrorCode::InsufficientMatches &&
        e.code() != ErrorCode::RegionTooSmall) {
      throw;
    }
    // keep the unrefined map, warning flag stays set
  }
}

void rebuild_pair_geometry(PipelineState& state,
                           const std::vector<Frame>& first_frames) {
  const StitchConfig& cfg = state.config;
  std::vector<Frame> warped(cfg.views.size());
  for (std::size_t v = 0; v < cfg.views.size(); ++v) {
    warped[v] = warp_frame(first_frames[v], state.warp_maps[v],
                           state.canvas.width, state.canvas.height,
                           state.canvas.offset);
  }
  for (auto& pair : state.pairs) {
    OverlapInfo info;
    try {
      info = overlap_regions(warped[pair.view], warped[cfg.reference]);
    } catch (const StitchError& e) {
      if (e.code() == ErrorCode::NoOverlap) {
        throw StitchError(ErrorCode::ConfigurationError,
                          "adjacent views do not overlap");
      }
      throw;
    }
    pair.bounds = info.bounds;
    pair.weights =
        blend_weights(warped[pair.view], warped[cfg.reference], pair.bounds);
  }
}

}  // namespace

PipelineState initialize(const StitchConfig& config,
                         const std::vector<Frame>& first_frames) {
  validate_config(config);
  if (first_frames.size() != config.views.size()) {
    throw StitchError(ErrorCode::ConfigurationError,
                      "frame count does not match configured views");
  }

  PipelineState state;
  state.config = config;

  std::vector<Homography> cam(config.views.size());
  for (std::size_t v = 0; v < config.views.size(); ++v) {
    cam[v] = planar_homography(config.views[v].intrinsics,
                               config.views[v].extrinsics);
  }
  state.warp_maps.resize(config.views.size());
  std::vector<std::pair<int, int>> sizes;
  for (std::size_t v = 0; v < config.views.size(); ++v) {
    state.warp_maps[v] = pairwise_homography(cam[config.reference], cam[v]);
    sizes.emplace_back(first_frames[v].width, first_frames[v].height);
  }
  state.canvas = compute_canvas(state.warp_maps, sizes);

  for (int v = 0; v < static_cast<int>(config.views.size()); ++v) {
    if (v == config.reference) continue;
    PipelineState::PairState pair;
    pair.view = v;
    pair.window = TransferWindow(config.window_capacity);
    state.pairs.push_back(std::move(pair));
  }

  rebuild_pair_geometry(state, first_frames);

  if (config.refine.enabled) {
    std::vector<Frame> warped(config.views.size());
    for (std::size_t v = 0; v < config.views.size(); ++v) {
      warped[v] = warp_frame(first_frames[v], state.warp_maps[v],
                             state.canvas.width, state.canvas.height,
                             state.canvas.offset);
    }
    for (auto& pair : state.pairs) {
      refine_pair(state, warped, pair);
    }
    // Refinement moved the maps, so overlap bounds and weights shift too.
    rebuild_pair_geometry(state, first_frames);
  }
  return state;
}

ProcessResult process_frame(PipelineState& state,
                            const std::vector<Frame>& frames) {
  const StitchConfig& cfg = state.config;
  if (frames.size() != cfg.views.size()) {
    throw StitchError(ErrorCode::ConfigurationError,
                      "frame count does not match configured views");
  }

  ProcessResult result;
  result.report.frame_index = state.frame_counter;

  // Geometric warping.
  auto t0 = Clock::now();
  std::vector<Frame> warped(frames.size());
  for (std::size_t v = 0; v < frames.size(); ++v) {
    warped[v] = warp_frame_parallel(frames[v], state.warp_maps[v],
                                    state.canvas, cfg.threads);
  }
  result.report.times[Stage::GeometricWarping] = seconds_since(t0);

  // Color correction (3D-M transfer per adjacent pair).
  t0 = Clock::now();
  for (auto& pair : state.pairs) {
    ColorMatrix m = ColorMatrix::identity();
    bool degraded = false;
    try {
      TransferResult res =
          transfer_step(warped[pair.view], warped[cfg.reference], pair.bounds,
                        pair.bounds, pair.window);
      pair.window = res.window;
      m = res.matrix;
      degraded = res.rank_deficient;
    } catch (const StitchError&) {
      degraded = true;  // identity matrix, window untouched
    }
    // The matrix extends to the whole view so the exclusive zone stays
    // continuous with the corrected overlap.
    apply_matrix_rows(warped[pair.view], m, cfg.threads);
    result.report.color_matrices.push_back(m.m);
    result.report.rank_deficient.push_back(degraded);
  }
  result.report.times[Stage::ColorCorrection] = seconds_since(t0);

  // Local warping (dense flow over each overlap).
  t0 = Clock::now();
  std::vector<Frame> crops_v(state.pairs.size());
  std::vector<Frame> crops_r(state.pairs.size());
  std::vector<FlowField> flows_vr(state.pairs.size());
  std::vector<FlowField> flows_rv(state.pairs.size());
  for (std::size_t i = 0; i < state.pairs.size(); ++i) {
    const auto& pair = state.pairs[i];
    crops_v[i] = crop_frame(warped[pair.view], pair.bounds);
    crops_r[i] = crop_frame(warped[cfg.reference], pair.bounds);
    FlowOptions fopt = cfg.flow;
    fopt.threads = cfg.threads;
    try {
      flows_vr[i] = dense_flow(crops_v[i], crops_r[i], fopt);
      flows_rv[i] = dense_flow(crops_r[i], crops_v[i], fopt);
    } catch (const StitchError&) {
      flows_vr[i] = FlowField::zero(pair.bounds.width(), pair.bounds.height());
      flows_rv[i] = FlowField::zero(pair.bounds.width(), pair.bounds.height());
    }
  }
  result.report.times[Stage::LocalWarping] = seconds_since(t0);

  // Image blending: fuse each overlap, then compose the canvas.
  t0 = Clock::now();
  Frame pano = warped[cfg.reference];
  for (std::size_t i = 0; i < state.pairs.size(); ++i) {
    const auto& pair = state.pairs[i];
    const Frame fused =
        flow_fuse(crops_v[i], crops_r[i], flows_vr[i], flows_rv[i],
                  pair.weights, cfg.fuse_weighting);
    pano = compose_panorama(pano, warped[pair.view], fused, pair.bounds);
  }
  result.report.times[Stage::ImageBlending] = seconds_since(t0);

  // Global balancing folds into the color-correction budget.
  t0 = Clock::now();
  try {
    const Histogram256 hist = compute_histogram(pano, pano.full_region());
    BalanceThresholds raw = find_thresholds(hist, cfg.balance.lambda);
    raw.frame_index = state.frame_counter;
    state.threshold_history.push_back(raw);
    if (state.threshold_history.size() > 3) {
      state.threshold_history.erase(state.threshold_history.begin());
    }
    const BalanceThresholds smoothed =
        smooth_thresholds(state.threshold_history);
    const ToneLUT lut = build_curve(smoothed, cfg.balance);
    apply_tone_rows(pano, lut, cfg.threads);
    result.report.threshold_m1 = smoothed.m1;
    result.report.threshold_m2 = smoothed.m2;
  } catch (const StitchError&) {
    // empty panorama histogram: leave the frame unbalanced
  }
  result.report.times[Stage::ColorCorrection] += seconds_since(t0);

  ++state.frame_counter;
  result.panorama = std::move(pano);
  return result;
}

RunResult run_sequence(
    const StitchConfig& config, const std::vector<std::vector<Frame>>& views,
    const std::function<void(long, const Frame&)>& sink) {
  validate_config(config);
  if (views.size() != config.views.size()) {
    throw StitchError(ErrorCode::ConfigurationError,
                      "stream count does not match configured views");
  }
  const std::size_t frames = views.front().size();
  for (const auto& stream : views) {
    if (stream.size() != frames) {
      throw StitchError(ErrorCode::ConfigurationError,
                        "streams must have equal length");
    }
  }
  if (frames == 0) {
    throw StitchError(ErrorCode::ConfigurationError, "empty input streams");
  }

  const auto wall0 = Clock::now();
  std::vector<Frame> first;
  for (const auto& stream : views) first.push_back(stream[0]);
  PipelineState state = initialize(config, first);

  RunResult result;
  result.report.scene_id = config.scene_id;
  result.report.threads = config.threads;
  result.report.frames = static_cast<long>(frames);
  for (const auto& pair : state.pairs) {
    result.report.refine_warning |= pair.refine_warning;
  }

  for (std::size_t t = 0; t < frames; ++t) {
    if (config.refine.rerefine_every > 0 && t > 0 &&
        t % static_cast<std::size_t>(config.refine.rerefine_every) == 0) {
      std::vector<Frame> current;
      for (const auto& stream : views) current.push_back(stream[t]);
      PipelineState fresh = initialize(config, current);
      fresh.threshold_history = state.threshold_history;
      fresh.frame_counter = state.frame_counter;
      for (std::size_t i = 0; i < fresh.pairs.size(); ++i) {
        fresh.pairs[i].window = state.pairs[i].window;
      }
      state = std::move(fresh);
    }
    std::vector<Frame> frame_set;
    for (const auto& stream : views) frame_set.push_back(stream[t]);
    ProcessResult pr = process_frame(state, frame_set);
    result.report.totals += pr.report.times;
    result.report.per_frame.push_back(std::move(pr.report));
    if (sink) {
      sink(static_cast<long>(t), pr.panorama);
    } else {
      result.panoramas.push_back(std::move(pr.panorama));
    }
  }
  result.report.wall_seconds = seconds_since(wall0);
  return result;
}

}  // namespace stitch
