#pragma once

#include <Eigen/Core>
#include <array>
#include <string>
#include <vector>

namespace stitch {

/// Pipeline stages, in the order the run report and timing tables use.
enum class Stage : int {
  GeometricWarping = 0,
  ColorCorrection = 1,
  LocalWarping = 2,
  ImageBlending = 3,
};
constexpr int kStageCount = 4;
extern const std::array<const char*, kStageCount> kStageNames;

struct StageTimes {
  std::array<double, kStageCount> seconds{};

  double total() const {
    double t = 0.0;
    for (double s : seconds) t += s;
    return t;
  }
  double& operator[](Stage s) { return seconds[static_cast<int>(s)]; }
  double operator[](Stage s) const { return seconds[static_cast<int>(s)]; }

  StageTimes& operator+=(const StageTimes& o) {
    for (int i = 0; i < kStageCount; ++i) seconds[i] += o.seconds[i];
    return *this;
  }
};

/// Per-frame diagnostics emitted by the pipeline.
struct FrameReport {
  long frame_index = 0;
  StageTimes times;
  std::vector<Eigen::Matrix3d> color_matrices;  // one per adjacent pair
  std::vector<bool> rank_deficient;
  std::array<int, 3> threshold_m1{};
  std::array<int, 3> threshold_m2{};
};

struct RunReport {
  std::string scene_id;
  int threads = 1;
  long frames = 0;
  StageTimes totals;
  double wall_seconds = 0.0;
  std::vector<FrameReport> per_frame;
  std::string config_hash;
  bool refine_warning = false;  // refinement fell back to the unrefined map

  double fps() const { return wall_seconds > 0 ? frames / wall_seconds : 0.0; }
};

}  // namespace stitch
