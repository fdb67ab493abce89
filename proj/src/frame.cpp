#include "stitch/frame.hpp"

#include <cmath>

namespace stitch {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyRegion: return "EmptyRegion";
    case ErrorCode::EmptyHistogram: return "EmptyHistogram";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::RegionTooSmall: return "RegionTooSmall";
    case ErrorCode::InsufficientMatches: return "InsufficientMatches";
    case ErrorCode::NoConsensus: return "NoConsensus";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NoOverlap: return "NoOverlap";
    case ErrorCode::SingularHomography: return "SingularHomography";
    case ErrorCode::DegeneratePose: return "DegeneratePose";
    case ErrorCode::EmptyProjection: return "EmptyProjection";
    case ErrorCode::MissingState: return "MissingState";
    case ErrorCode::TooSmall: return "TooSmall";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::ConfigurationError: return "ConfigurationError";
    case ErrorCode::InputMismatch: return "InputMismatch";
    case ErrorCode::IoError: return "IoError";
  }
  return "UnknownError";
}

std::uint8_t quantize_channel(double v) {
  double r = std::round(v);  // half away from zero
  if (r < 0.0) return 0;
  if (r > 255.0) return 255;
  return static_cast<std::uint8_t>(r);
}

PlaneF to_luma(const Frame& frame) {
  PlaneF plane(frame.height, frame.width);
  for (int y = 0; y < frame.height; ++y) {
    for (int x = 0; x < frame.width; ++x) {
      if (!frame.valid_at(x, y)) {
        plane(y, x) = 0.0f;
        continue;
      }
      const std::uint8_t* p = frame.px(x, y);
      plane(y, x) = luma601(p[0], p[1], p[2]);
    }
  }
  return plane;
}

void check_region(const Frame& frame, const Region& region) {
  if (region.empty()) throw StitchError(ErrorCode::EmptyRegion);
  if (region.x0 < 0 || region.y0 < 0 || region.x1 > frame.width ||
      region.y1 > frame.height) {
    throw StitchError(ErrorCode::EmptyRegion,
                      "region exceeds frame bounds");
  }
}

Frame crop_frame(const Frame& frame, const Region& region) {
  check_region(frame, region);
  Frame out = Frame::with_mask(region.width(), region.height(), 0, 0);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      const int sx = region.x0 + x;
      const int sy = region.y0 + y;
      const std::uint8_t* src = frame.px(sx, sy);
      std::uint8_t* dst = out.px(x, y);
      dst[0] = src[0];
      dst[1] = src[1];
      dst[2] = src[2];
      out.mask[out.index(x, y)] = frame.valid_at(sx, sy) ? 1 : 0;
    }
  }
  return out;
}

BilinearSample sample_bilinear(const Frame& frame, double x, double y) {
  BilinearSample out;
  const double fx0 = std::floor(x);
  const double fy0 = std::floor(y);
  const int x0 = static_cast<int>(fx0);
  const int y0 = static_cast<int>(fy0);
  const double ax = x - fx0;
  const double ay = y - fy0;

  const int xs[2] = {x0, x0 + 1};
  const int ys[2] = {y0, y0 + 1};
  const double wx[2] = {1.0 - ax, ax};
  const double wy[2] = {1.0 - ay, ay};

  double wsum = 0.0;
  Eigen::Vector3d acc = Eigen::Vector3d::Zero();
  for (int j = 0; j < 2; ++j) {
    for (int i = 0; i < 2; ++i) {
      const double w = wx[i] * wy[j];
      if (w <= 0.0) continue;
      if (!frame.valid_at(xs[i], ys[j])) continue;
      const std::uint8_t* p = frame.px(xs[i], ys[j]);
      acc += w * Eigen::Vector3d(p[0], p[1], p[2]);
      wsum += w;
    }
  }
  if (wsum <= 0.0) return out;
  out.rgb = (acc / wsum).cast<float>();
  out.valid = true;
  return out;
}

}  // namespace stitch
