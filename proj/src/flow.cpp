#include "stitch/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "stitch/parallel.hpp"

namespace stitch {

namespace {

constexpr float kFarAway = 1e9f;

PlaneF downsample_half(const PlaneF& src) {
  const int w = std::max<int>(1, static_cast<int>(src.cols()) / 2);
  const int h = std::max<int>(1, static_cast<int>(src.rows()) / 2);
  PlaneF out(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int x0 = 2 * x;
      const int y0 = 2 * y;
      const int x1 = std::min<int>(x0 + 1, static_cast<int>(src.cols()) - 1);
      const int y1 = std::min<int>(y0 + 1, static_cast<int>(src.rows()) - 1);
      out(y, x) =
          0.25f * (src(y0, x0) + src(y0, x1) + src(y1, x0) + src(y1, x1));
    }
  }
  return out;
}

PlaneF resize_bilinear(const PlaneF& src, int w, int h, float value_scale) {
  PlaneF out(h, w);
  const int sw = static_cast<int>(src.cols());
  const int sh = static_cast<int>(src.rows());
  const float fx = w > 1 ? static_cast<float>(sw - 1) / (w - 1) : 0.0f;
  const float fy = h > 1 ? static_cast<float>(sh - 1) / (h - 1) : 0.0f;
  for (int y = 0; y < h; ++y) {
    const float sy = y * fy;
    const int y0 = std::min(sh - 1, static_cast<int>(sy));
    const int y1 = std::min(sh - 1, y0 + 1);
    const float ay = sy - y0;
    for (int x = 0; x < w; ++x) {
      const float sx = x * fx;
      const int x0 = std::min(sw - 1, static_cast<int>(sx));
      const int x1 = std::min(sw - 1, x0 + 1);
      const float ax = sx - x0;
      const float top = (1 - ax) * src(y0, x0) + ax * src(y0, x1);
      const float bot = (1 - ax) * src(y1, x0) + ax * src(y1, x1);
      out(y, x) = value_scale * ((1 - ay) * top + ay * bot);
    }
  }
  return out;
}

float sample_clamped(const PlaneF& img, float x, float y) {
  const int w = static_cast<int>(img.cols());
  const int h = static_cast<int>(img.rows());
  x = std::clamp(x, 0.0f, static_cast<float>(w - 1));
  y = std::clamp(y, 0.0f, static_cast<float>(h - 1));
  const int x0 = std::min(w - 1, static_cast<int>(x));
  const int y0 = std::min(h - 1, static_cast<int>(y));
  const int x1 = std::min(w - 1, x0 + 1);
  const int y1 = std::min(h - 1, y0 + 1);
  const float ax = x - x0;
  const float ay = y - y0;
  return (1 - ay) * ((1 - ax) * img(y0, x0) + ax * img(y0, x1)) +
         ay * ((1 - ax) * img(y1, x0) + ax * img(y1, x1));
}

// One pyramid level of warped Horn-Schunck refinement. Jacobi sweeps read
// the previous buffer only, so row-parallel execution is bit-identical.
void refine_level(const PlaneF& a, const PlaneF& b, PlaneF& u, PlaneF& v,
                  int iterations, double alpha, int threads) {
  const int w = static_cast<int>(a.cols());
  const int h = static_cast<int>(a.rows());
  const float alpha2 = static_cast<float>(alpha * alpha);
  const int warps = 5;
  const int sweeps = std::max(1, iterations / warps);

  PlaneF bw(h, w), ix(h, w), iy(h, w), it(h, w), u0(h, w), v0(h, w);
  PlaneF un(h, w), vn(h, w);

  for (int warp = 0; warp < warps; ++warp) {
    // Warp b by the current flow and linearize around it.
    parallel_for(h, threads, [&](long y0, long y1) {
      for (long y = y0; y < y1; ++y) {
        for (int x = 0; x < w; ++x) {
          bw(y, x) = sample_clamped(b, x + u(y, x), y + v(y, x));
        }
      }
    });
    u0 = u;
    v0 = v;
    parallel_for(h, threads, [&](long r0, long r1) {
      for (long y = r0; y < r1; ++y) {
        const int ym = std::max<int>(0, static_cast<int>(y) - 1);
        const int yp = std::min<int>(h - 1, static_cast<int>(y) + 1);
        for (int x = 0; x < w; ++x) {
          const int xm = std::max(0, x - 1);
          const int xp = std::min(w - 1, x + 1);
          ix(y, x) = 0.25f * (a(y, xp) - a(y, xm) + bw(y, xp) - bw(y, xm));
          iy(y, x) = 0.25f * (a(yp, x) - a(ym, x) + bw(yp, x) - bw(ym, x));
          it(y, x) = bw(y, x) - a(y, x);
        }
      }
    });
    for (int sweep = 0; sweep < sweeps; ++sweep) {
      parallel_for(h, threads, [&](long r0, long r1) {
        for (long y = r0; y < r1; ++y) {
          const int ym = std::max<int>(0, static_cast<int>(y) - 1);
          const int yp = std::min<int>(h - 1, static_cast<int>(y) + 1);
          for (int x = 0; x < w; ++x) {
            const int xm = std::max(0, x - 1);
            const int xp = std::min(w - 1, x + 1);
            const float ubar =
                0.25f * (u(y, xm) + u(y, xp) + u(ym, x) + u(yp, x));
            const float vbar =
                0.25f * (v(y, xm) + v(y, xp) + v(ym, x) + v(yp, x));
            const float gx = ix(y, x);
            const float gy = iy(y, x);
            // Residual of the linearized constancy term at (ubar, vbar).
            const float c = it(y, x) - gx * u0(y, x) - gy * v0(y, x);
            const float denom = alpha2 + gx * gx + gy * gy;
            const float common = (gx * ubar + gy * vbar + c) / denom;
            un(y, x) = ubar - gx * common;
            vn(y, x) = vbar - gy * common;
          }
        }
      });
      u.swap(un);
      v.swap(vn);
    }
  }
}

}  // namespace

FlowField dense_flow(const Frame& region_a, const Frame& region_b,
                     const FlowOptions& opts) {
  if (region_a.width != region_b.width || region_a.height != region_b.height) {
    throw StitchError(ErrorCode::ShapeMismatch,
                      "flow inputs must have equal dimensions");
  }
  if (region_a.width < 16 || region_a.height < 16) {
    throw StitchError(ErrorCode::TooSmall, "flow inputs must be >= 16x16");
  }

  std::vector<PlaneF> pyr_a{to_luma(region_a)};
  std::vector<PlaneF> pyr_b{to_luma(region_b)};
  for (int l = 1; l < opts.levels; ++l) {
    if (pyr_a.back().cols() < 16 || pyr_a.back().rows() < 16) break;
    pyr_a.push_back(downsample_half(pyr_a.back()));
    pyr_b.push_back(downsample_half(pyr_b.back()));
  }

  const int coarsest = static_cast<int>(pyr_a.size()) - 1;
  PlaneF u = PlaneF::Zero(pyr_a[coarsest].rows(), pyr_a[coarsest].cols());
  PlaneF v = u;
  for (int l = coarsest; l >= 0; --l) {
    if (l != coarsest) {
      const int w = static_cast<int>(pyr_a[l].cols());
      const int h = static_cast<int>(pyr_a[l].rows());
      const float sx = static_cast<float>(w) / static_cast<float>(u.cols());
      u = resize_bilinear(u, w, h, sx);
      v = resize_bilinear(v, w, h, sx);
    }
    refine_level(pyr_a[l], pyr_b[l], u, v, opts.iterations, opts.smoothness,
                 opts.threads);
  }

  FlowField flow;
  flow.width = region_a.width;
  flow.height = region_a.height;
  flow.u = std::move(u);
  flow.v = std::move(v);
  for (int y = 0; y < flow.height; ++y) {
    for (int x = 0; x < flow.width; ++x) {
      if (!region_a.valid_at(x, y) || !region_b.valid_at(x, y)) {
        flow.u(y, x) = 0.0f;
        flow.v(y, x) = 0.0f;
      }
    }
  }
  return flow;
}

namespace {

// Two-pass 3-4 chamfer distance (in chamfer units) to the given zone.
PlaneF chamfer_distance(const std::vector<std::uint8_t>& zone, int w, int h) {
  PlaneF d(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      d(y, x) = zone[static_cast<std::size_t>(y) * w + x] ? 0.0f : kFarAway;

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      float best = d(y, x);
      if (x > 0) best = std::min(best, d(y, x - 1) + 3.0f);
      if (y > 0) {
        best = std::min(best, d(y - 1, x) + 3.0f);
        if (x > 0) best = std::min(best, d(y - 1, x - 1) + 4.0f);
        if (x + 1 < w) best = std::min(best, d(y - 1, x + 1) + 4.0f);
      }
      d(y, x) = best;
    }
  }
  for (int y = h - 1; y >= 0; --y) {
    for (int x = w - 1; x >= 0; --x) {
      float best = d(y, x);
      if (x + 1 < w) best = std::min(best, d(y, x + 1) + 3.0f);
      if (y + 1 < h) {
        best = std::min(best, d(y + 1, x) + 3.0f);
        if (x + 1 < w) best = std::min(best, d(y + 1, x + 1) + 4.0f);
        if (x > 0) best = std::min(best, d(y + 1, x - 1) + 4.0f);
      }
      d(y, x) = best;
    }
  }
  return d;
}

}  // namespace

BlendWeights blend_weights(const Frame& warped_i, const Frame& warped_j,
                           const Region& bounds) {
  if (warped_i.width != warped_j.width || warped_i.height != warped_j.height) {
    throw StitchError(ErrorCode::ShapeMismatch);
  }
  const int w = warped_i.width;
  const int h = warped_i.height;
  std::vector<std::uint8_t> excl_i(static_cast<std::size_t>(w) * h, 0);
  std::vector<std::uint8_t> excl_j(excl_i.size(), 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const bool vi = warped_i.valid_at(x, y);
      const bool vj = warped_j.valid_at(x, y);
      const std::size_t idx = static_cast<std::size_t>(y) * w + x;
      excl_i[idx] = vi && !vj;
      excl_j[idx] = vj && !vi;
    }
  }
  const PlaneF to_j = chamfer_distance(excl_j, w, h);
  const PlaneF to_i = chamfer_distance(excl_i, w, h);

  BlendWeights weights;
  weights.width = bounds.width();
  weights.height = bounds.height();
  weights.theta_i = PlaneF::Zero(bounds.height(), bounds.width());
  weights.theta_j = PlaneF::Zero(bounds.height(), bounds.width());
  for (int y = 0; y < bounds.height(); ++y) {
    for (int x = 0; x < bounds.width(); ++x) {
      const float cj = to_j(bounds.y0 + y, bounds.x0 + x);
      const float ci = to_i(bounds.y0 + y, bounds.x0 + x);
      // Distance measured from just inside the overlap border so that the
      // border pixels carry the full weight of their own image.
      const float di = cj >= kFarAway ? kFarAway
                                      : std::max(0.0f, cj / 3.0f - 1.0f);
      const float dj = ci >= kFarAway ? kFarAway
                                      : std::max(0.0f, ci / 3.0f - 1.0f);
      float ti;
      if (di >= kFarAway && dj >= kFarAway) {
        ti = 0.5f;
      } else if (di >= kFarAway) {
        ti = 1.0f;
      } else if (dj >= kFarAway) {
        ti = 0.0f;
      } else if (di + dj <= 0.0f) {
        ti = 0.5f;
      } else {
        ti = di / (di + dj);
      }
      weights.theta_i(y, x) = ti;
      weights.theta_j(y, x) = 1.0f - ti;
    }
  }
  return weights;
}

Frame flow_fuse(const Frame& region_i, const Frame& region_j,
                const FlowField& flow_ij, const FlowField& flow_ji,
                const BlendWeights& weights, FuseWeighting weighting) {
  const int w = region_i.width;
  const int h = region_i.height;
  if (region_j.width != w || region_j.height != h || flow_ij.width != w ||
      flow_ij.height != h || flow_ji.width != w || flow_ji.height != h ||
      weights.width != w || weights.height != h) {
    throw StitchError(ErrorCode::ShapeMismatch);
  }
  Frame out = Frame::with_mask(w, h, 0, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const float ti = weights.theta_i(y, x);
      const float tj = weights.theta_j(y, x);
      const float wi =
          weighting == FuseWeighting::OwnWeightOnOwnFlow ? ti : tj;
      const float wj =
          weighting == FuseWeighting::OwnWeightOnOwnFlow ? tj : ti;
      const BilinearSample si = sample_bilinear(
          region_i, x + wi * flow_ij.u(y, x), y + wi * flow_ij.v(y, x));
      const BilinearSample sj = sample_bilinear(
          region_j, x + wj * flow_ji.u(y, x), y + wj * flow_ji.v(y, x));
      if (!si.valid && !sj.valid) continue;
      Eigen::Vector3f rgb;
      if (si.valid && sj.valid) {
        rgb = ti * si.rgb + tj * sj.rgb;
      } else if (si.valid) {
        rgb = si.rgb;
      } else {
        rgb = sj.rgb;
      }
      std::uint8_t* p = out.px(x, y);
      p[0] = quantize_channel(rgb(0));
      p[1] = quantize_channel(rgb(1));
      p[2] = quantize_channel(rgb(2));
      out.mask[out.index(x, y)] = 1;
    }
  }
  return out;
}

Frame compose_panorama(const Frame& warped_i, const Frame& warped_j,
                       const Frame& fused_overlap, const Region& overlap) {
  if (warped_i.width != warped_j.width || warped_i.height != warped_j.height) {
    throw StitchError(ErrorCode::ShapeMismatch);
  }
  Frame out = Frame::with_mask(warped_i.width, warped_i.height, 0, 0);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      const bool vi = warped_i.valid_at(x, y);
      const bool vj = warped_j.valid_at(x, y);
      const std::uint8_t* src = nullptr;
      if (vi && vj) {
        const int dx = x - overlap.x0;
        const int dy = y - overlap.y0;
        if (fused_overlap.valid_at(dx, dy)) {
          src = fused_overlap.px(dx, dy);
        } else {
          src = warped_i.px(x, y);
        }
      } else if (vi) {
        src = warped_i.px(x, y);
      } else if (vj) {
        src = warped_j.px(x, y);
      }
      if (!src) continue;
      std::uint8_t* dst = out.px(x, y);
      dst[0] = src[0];
      dst[1] = src[1];
      dst[2] = src[2];
      out.mask[out.index(x, y)] = 1;
    }
  }
  return out;
}

void write_flow(const std::filesystem::path& path, const FlowField& flow) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw StitchError(ErrorCode::IoError, path.string());
  const std::uint32_t dims[2] = {static_cast<std::uint32_t>(flow.width),
                                 static_cast<std::uint32_t>(flow.height)};
  out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  out.write(reinterpret_cast<const char*>(flow.u.data()),
            static_cast<std::streamsize>(sizeof(float) * flow.u.size()));
  out.write(reinterpret_cast<const char*>(flow.v.data()),
            static_cast<std::streamsize>(sizeof(float) * flow.v.size()));
  if (!out) throw StitchError(ErrorCode::IoError, path.string());
}

FlowField read_flow(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StitchError(ErrorCode::IoError, path.string());
  std::uint32_t dims[2];
  in.read(reinterpret_cast<char*>(dims), sizeof(dims));
  FlowField flow = FlowField::zero(static_cast<int>(dims[0]),
                                   static_cast<int>(dims[1]));
  in.read(reinterpret_cast<char*>(flow.u.data()),
          static_cast<std::streamsize>(sizeof(float) * flow.u.size()));
  in.read(reinterpret_cast<char*>(flow.v.data()),
          static_cast<std::streamsize>(sizeof(float) * flow.v.size()));
  if (!in) throw StitchError(ErrorCode::IoError, path.string());
  return flow;
}

}  // namespace stitch
