#include "stitch/synth.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>

#include "stitch/image_io.hpp"

namespace stitch {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

double lattice(std::uint64_t seed, long ix, long iy) {
  std::uint64_t h = seed;
  h = splitmix64(h ^ static_cast<std::uint64_t>(ix) * 0x9e3779b97f4a7c15ull);
  h = splitmix64(h ^ static_cast<std::uint64_t>(iy) * 0xc2b2ae3d27d4eb4full);
  return static_cast<double>(h >> 11) * (1.0 / 9007199254740992.0);
}

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

}  // namespace

double value_noise(std::uint64_t seed, double x, double y) {
  const double fx = std::floor(x);
  const double fy = std::floor(y);
  const long ix = static_cast<long>(fx);
  const long iy = static_cast<long>(fy);
  const double tx = smoothstep(x - fx);
  const double ty = smoothstep(y - fy);
  const double v00 = lattice(seed, ix, iy);
  const double v10 = lattice(seed, ix + 1, iy);
  const double v01 = lattice(seed, ix, iy + 1);
  const double v11 = lattice(seed, ix + 1, iy + 1);
  const double top = v00 + (v10 - v00) * tx;
  const double bot = v01 + (v11 - v01) * tx;
  return top + (bot - top) * ty;
}

Eigen::Vector3d texture_rgb(std::uint64_t seed, double x, double y) {
  Eigen::Vector3d rgb;
  for (int c = 0; c < 3; ++c) {
    const std::uint64_t s = splitmix64(seed + 0x517cc1b727220a95ull * (c + 1));
    const double n = 0.55 * value_noise(s, x / 48.0, y / 48.0) +
                     0.30 * value_noise(s ^ 0xabcdu, x / 12.0, y / 12.0) +
                     0.15 * value_noise(s ^ 0x1234u, x / 3.0, y / 3.0);
    rgb(c) = 20.0 + 215.0 * n;
  }
  return rgb;
}

SynthScene::SynthScene(const SynthSpec& spec) : spec_(spec) {
  if (spec_.views < 2 || spec_.views > 3) {
    throw StitchError(ErrorCode::ConfigError, "views must be 2 or 3");
  }
  if (spec_.frames < 1) {
    throw StitchError(ErrorCode::ConfigError, "frames must be >= 1");
  }
  if (!(spec_.overlap_fraction > 0.05 && spec_.overlap_fraction < 0.9)) {
    throw StitchError(ErrorCode::ConfigError,
                      "overlap fraction must be in (0.05, 0.9)");
  }
  if (!spec_.color_casts.empty() &&
      static_cast<int>(spec_.color_casts.size()) != spec_.views) {
    throw StitchError(ErrorCode::ConfigError,
                      "color_casts must have one entry per view");
  }

  reference_ = spec_.views == 3 ? 1 : 0;
  focal_ = 0.9 * spec_.width;
  baseline_ = 0.05 * distance_;

  auto build_cameras = [&](double yaw_step) {
    intr_.clear();
    extr_.clear();
    cams_.clear();
    for (int v = 0; v < spec_.views; ++v) {
      const int k = v - reference_;
      CameraIntrinsics intr;
      intr.fx = focal_;
      intr.fy = focal_;
      intr.cx = spec_.width / 2.0;
      intr.cy = spec_.height / 2.0;
      const double yaw = k * yaw_step;
      Eigen::Matrix3d ry;
      ry << std::cos(yaw), 0, std::sin(yaw), 0, 1, 0, -std::sin(yaw), 0,
          std::cos(yaw);
      CameraExtrinsics extr;
      extr.rotation = ry.transpose();  // world -> camera
      const Eigen::Vector3d centre(k * baseline_, 0.0, -distance_);
      extr.translation = -extr.rotation * centre;
      intr_.push_back(intr);
      extr_.push_back(extr);
      cams_.push_back(planar_homography(intr, extr));
    }
  };

  // Footprint overlap between adjacent views shrinks monotonically with yaw;
  // bisect for the requested fraction.
  auto overlap_of = [&](double yaw_step) {
    build_cameras(yaw_step);
    double worst = 1.0;
    for (int v = 0; v < spec_.views; ++v) {
      if (v == reference_) continue;
      const Homography inv_v = cams_[v].inverse();
      const Homography inv_r = cams_[reference_].inverse();
      auto span = [&](const Homography& inv) {
        double lo = 1e18, hi = -1e18;
        const double w = spec_.width - 1.0;
        const double h = spec_.height - 1.0;
        const Eigen::Vector2d corners[4] = {{0, 0}, {w, 0}, {0, h}, {w, h}};
        for (const auto& c : corners) {
          const double x = inv.apply(c).x();
          lo = std::min(lo, x);
          hi = std::max(hi, x);
        }
        return std::pair<double, double>(lo, hi);
      };
      const auto [alo, ahi] = span(inv_v);
      const auto [blo, bhi] = span(inv_r);
      const double inter = std::min(ahi, bhi) - std::max(alo, blo);
      const double denom = std::min(ahi - alo, bhi - blo);
      worst = std::min(worst, denom > 0 ? inter / denom : 0.0);
    }
    return worst;
  };

  double lo = 0.0, hi = 0.6;  // radians
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (overlap_of(mid) > spec_.overlap_fraction) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  yaw_step_ = lo;
  build_cameras(yaw_step_);

  true_maps_.clear();
  for (int v = 0; v < spec_.views; ++v) {
    true_maps_.push_back(pairwise_homography(cams_[reference_], cams_[v]));
  }
}

SynthScene synth_scene(const SynthSpec& spec) { return SynthScene(spec); }

StitchConfig SynthScene::config() const {
  StitchConfig cfg;
  cfg.reference = reference_;
  cfg.seed = spec_.seed;
  cfg.scene_id = "synth-" + std::to_string(spec_.seed);
  for (int v = 0; v < spec_.views; ++v) {
    ViewSetup setup;
    setup.intrinsics = intr_[v];
    setup.extrinsics = extr_[v];
    if (v != reference_) {
      setup.intrinsics.fx *= spec_.perturb_focal_scale;
      setup.intrinsics.fy *= spec_.perturb_focal_scale;
      if (spec_.perturb_principal_px != 0.0) {
        // Seeded unit direction, fixed per view.
        const double ang =
            2.0 * M_PI * lattice(splitmix64(spec_.seed ^ 0xfeedu), v, 0);
        setup.intrinsics.cx += spec_.perturb_principal_px * std::cos(ang);
        setup.intrinsics.cy += spec_.perturb_principal_px * std::sin(ang);
      }
    }
    cfg.views.push_back(setup);
  }
  return cfg;
}

Eigen::Vector3d SynthScene::shade(int view, int frame, double px,
                                  double py) const {
  // Ray from the camera centre through the pixel.
  const Eigen::Matrix3d r_wc = extr_[view].rotation.transpose();
  const Eigen::Vector3d centre =
      -r_wc * extr_[view].translation;  // camera centre in world coords
  const Eigen::Vector3d dir =
      r_wc * intr_[view].k().inverse() * Eigen::Vector3d(px, py, 1.0);

  if (spec_.object.enabled && std::abs(dir.z()) > 1e-12) {
    const double zo = -spec_.object.depth_fraction * distance_;
    const double s = (zo - centre.z()) / dir.z();
    if (s > 0) {
      const Eigen::Vector3d hit = centre + s * dir;
      const Eigen::Vector2d pos =
          spec_.object.position + frame * spec_.object.velocity;
      if (std::abs(hit.x() - pos.x()) <= spec_.object.half_size &&
          std::abs(hit.y() - pos.y()) <= spec_.object.half_size) {
        return texture_rgb(splitmix64(spec_.seed ^ 0x0b7ec7ull),
                           hit.x() - pos.x(), hit.y() - pos.y());
      }
    }
  }
  if (std::abs(dir.z()) < 1e-12) return Eigen::Vector3d::Zero();
  const double s = (0.0 - centre.z()) / dir.z();
  const Eigen::Vector3d hit = centre + s * dir;
  return texture_rgb(spec_.seed, hit.x(), hit.y());
}

Frame SynthScene::render_view(int view, int frame) const {
  Eigen::Vector3d gains(1.0, 1.0, 1.0);
  if (!spec_.color_casts.empty()) {
    for (int c = 0; c < 3; ++c) gains(c) = spec_.color_casts[view][c];
  }
  for (const auto& f : spec_.flicker) {
    if (f.frame == frame && f.view == view) {
      for (int c = 0; c < 3; ++c) gains(c) *= f.gains[c];
    }
  }
  Frame out(spec_.width, spec_.height);
  for (int y = 0; y < spec_.height; ++y) {
    for (int x = 0; x < spec_.width; ++x) {
      const Eigen::Vector3d rgb = shade(view, frame, x, y);
      std::uint8_t* p = out.px(x, y);
      p[0] = quantize_channel(rgb(0) * gains(0));
      p[1] = quantize_channel(rgb(1) * gains(1));
      p[2] = quantize_channel(rgb(2) * gains(2));
    }
  }
  return out;
}

Frame SynthScene::render_plane_canvas(const CanvasGeometry& canvas,
                                      int frame) const {
  Frame out = Frame::with_mask(canvas.width, canvas.height, 0, 1);
  for (int y = 0; y < canvas.height; ++y) {
    for (int x = 0; x < canvas.width; ++x) {
      const Eigen::Vector3d rgb = shade(reference_, frame,
                                        x + canvas.offset.x(),
                                        y + canvas.offset.y());
      std::uint8_t* p = out.px(x, y);
      p[0] = quantize_channel(rgb(0));
      p[1] = quantize_channel(rgb(1));
      p[2] = quantize_channel(rgb(2));
    }
  }
  return out;
}

std::vector<std::vector<Frame>> SynthScene::render_streams() const {
  std::vector<std::vector<Frame>> streams(spec_.views);
  for (int v = 0; v < spec_.views; ++v) {
    for (int t = 0; t < spec_.frames; ++t) {
      streams[v].push_back(render_view(v, t));
    }
  }
  return streams;
}

void SynthScene::write_scene(const std::filesystem::path& dir) const {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  StitchConfig cfg = config();
  for (int v = 0; v < spec_.views; ++v) {
    const fs::path view_dir = dir / ("view" + std::to_string(v));
    fs::create_directories(view_dir);
    cfg.views[v].dir = view_dir.string();
    for (int t = 0; t < spec_.frames; ++t) {
      write_png(view_dir / sequence_name("frame", t), render_view(v, t));
    }
  }

  nlohmann::json doc;
  doc["views"] = nlohmann::json::array();
  for (const auto& view : cfg.views) {
    nlohmann::json cam;
    cam["fx"] = view.intrinsics.fx;
    cam["fy"] = view.intrinsics.fy;
    cam["cx"] = view.intrinsics.cx;
    cam["cy"] = view.intrinsics.cy;
    nlohmann::json rot = nlohmann::json::array();
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) rot.push_back(view.extrinsics.rotation(r, c));
    cam["rotation"] = rot;
    cam["translation"] = {view.extrinsics.translation(0),
                          view.extrinsics.translation(1),
                          view.extrinsics.translation(2)};
    doc["views"].push_back({{"dir", view.dir}, {"camera", cam}});
  }
  doc["reference"] = cfg.reference;
  doc["seed"] = cfg.seed;
  doc["scene_id"] = cfg.scene_id;
  std::ofstream(dir / "config.json") << doc.dump(2) << "\n";

  const fs::path gt_dir = dir / "gt";
  fs::create_directories(gt_dir);
  nlohmann::json gt;
  gt["true_maps"] = nlohmann::json::array();
  for (const auto& map : true_maps_) {
    nlohmann::json m = nlohmann::json::array();
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) m.push_back(map.h(r, c));
    gt["true_maps"].push_back(m);
  }
  std::ofstream(gt_dir / "true_maps.json") << gt.dump(2) << "\n";

  std::vector<std::pair<int, int>> sizes(spec_.views,
                                         {spec_.width, spec_.height});
  const CanvasGeometry canvas = compute_canvas(true_maps_, sizes);
  for (int t = 0; t < spec_.frames; ++t) {
    write_png(gt_dir / sequence_name("pano", t),
              render_plane_canvas(canvas, t));
  }
}

}  // namespace stitch
