#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include "stitch/pipeline.hpp"

namespace stitch {

/// Deterministic value-noise in [0, 1], continuous in (x, y).
double value_noise(std::uint64_t seed, double x, double y);

/// Three-octave procedural texture, RGB in [0, 255] (unquantized).
Eigen::Vector3d texture_rgb(std::uint64_t seed, double x, double y);

struct FlickerEvent {
  int frame = 0;
  int view = 0;
  std::array<double, 3> gains{1.0, 1.0, 1.0};
};

struct ParallaxObject {
  bool enabled = false;
  double depth_fraction = 0.15;  // of the camera-to-plane distance
  double half_size = 40.0;       // world units
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  Eigen::Vector2d velocity = Eigen::Vector2d::Zero();  // world units per frame
};

struct SynthSpec {
  std::uint64_t seed = 1;
  int views = 2;
  int frames = 5;
  int width = 320;
  int height = 240;
  double overlap_fraction = 0.3;  // must be in (0.05, 0.9)
  std::vector<std::array<double, 3>> color_casts;  // per view; default unity
  std::vector<FlickerEvent> flicker;
  ParallaxObject object;
  // Applied only to the config handed to the pipeline; rendering stays exact.
  double perturb_focal_scale = 1.0;
  double perturb_principal_px = 0.0;
};

/// A textured world plane watched by 2-3 cameras whose yaw is solved so
/// adjacent views overlap by the requested fraction. Rendering is exact ray
/// casting, so the true homographies are known analytically.
class SynthScene {
 public:
  explicit SynthScene(const SynthSpec& spec);

  const SynthSpec& spec() const { return spec_; }
  int reference_view() const { return reference_; }

  /// Pipeline config carrying the (optionally perturbed) intrinsics.
  StitchConfig config() const;
  /// Exact camera homographies (world plane -> view image).
  const std::vector<Homography>& camera_homographies() const { return cams_; }
  /// Exact pairwise maps, view image -> reference plane.
  const std::vector<Homography>& true_maps() const { return true_maps_; }

  Frame render_view(int view, int frame) const;
  /// The scene as the reference camera sees it over the given canvas: the
  /// ground-truth panorama (no casts, no flicker).
  Frame render_plane_canvas(const CanvasGeometry& canvas, int frame) const;

  std::vector<std::vector<Frame>> render_streams() const;

  /// Writes view directories, a ready-to-run config.json, and ground truth
  /// (true homographies + clean panoramas) under dir.
  void write_scene(const std::filesystem::path& dir) const;

 private:
  Eigen::Vector3d shade(int view, int frame, double px, double py) const;

  SynthSpec spec_;
  int reference_ = 0;
  double focal_ = 0.0;
  double distance_ = 500.0;
  double baseline_ = 0.0;
  double yaw_step_ = 0.0;  // radians, solved from overlap_fraction
  std::vector<CameraIntrinsics> intr_;
  std::vector<CameraExtrinsics> extr_;
  std::vector<Homography> cams_;
  std::vector<Homography> true_maps_;
};

/// Validates the spec and builds the scene. Throws ConfigError when the spec
/// is degenerate (overlap fraction out of range, bad view count).
SynthScene synth_scene(const SynthSpec& spec);

}  // namespace stitch
