#include "stitch/features.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace stitch {

namespace {

// Filter side lengths per octave/layer (9, 15, 21, 27; 15, 27, ...).
constexpr int kOctaves = 3;
constexpr int kLayers = 4;

int filter_size(int octave, int layer) {
  return 3 * ((1 << octave) * (layer + 1) + 1);
}

// Hessian-determinant response of the box-filter approximation at (x, y),
// intensities scaled to [0,1] so thresholds are resolution-independent.
double hessian_response(const IntegralImage& ii, int x, int y, int size) {
  const int lobe = size / 3;
  const int border = (size - 1) / 2;
  const double inv_area = 1.0 / (255.0 * size * size);

  auto box = [&](int bx, int by, int w, int h) {
    return static_cast<double>(ii.box_sum(bx, by, bx + w, by + h));
  };

  double dxx = box(x - border, y - lobe + 1, size, 2 * lobe - 1) -
               3.0 * box(x - lobe / 2, y - lobe + 1, lobe, 2 * lobe - 1);
  double dyy = box(x - lobe + 1, y - border, 2 * lobe - 1, size) -
               3.0 * box(x - lobe + 1, y - lobe / 2, 2 * lobe - 1, lobe);
  double dxy = box(x + 1, y - lobe, lobe, lobe) +
               box(x - lobe, y + 1, lobe, lobe) -
               box(x - lobe, y - lobe, lobe, lobe) -
               box(x + 1, y + 1, lobe, lobe);
  dxx *= inv_area;
  dyy *= inv_area;
  dxy *= inv_area;
  return dxx * dyy - 0.81 * dxy * dxy;
}

using ResponseLayer = Eigen::Array<float, Eigen::Dynamic, Eigen::Dynamic,
                                   Eigen::RowMajor>;

}  // namespace

std::vector<Keypoint> detect(const Frame& frame, const Region& region,
                             double threshold) {
  check_region(frame, region);
  if (region.width() < 32 || region.height() < 32) {
    throw StitchError(ErrorCode::RegionTooSmall,
                      "detection region must be at least 32x32");
  }
  const IntegralImage ii(frame);

  std::vector<Keypoint> keypoints;
  for (int octave = 1; octave <= kOctaves; ++octave) {
    // Responses for all four layers of this octave, region-local, step 1.
    const int rw = region.width();
    const int rh = region.height();
    std::array<ResponseLayer, kLayers> layers;
    std::array<int, kLayers> sizes{};
    for (int l = 0; l < kLayers; ++l) {
      sizes[l] = filter_size(octave, l);
      layers[l] = ResponseLayer::Zero(rh, rw);
      const int margin = (sizes[l] - 1) / 2 + 1;
      for (int y = 0; y < rh; ++y) {
        const int fy = region.y0 + y;
        if (fy < margin || fy >= frame.height - margin) continue;
        for (int x = 0; x < rw; ++x) {
          const int fx = region.x0 + x;
          if (fx < margin || fx >= frame.width - margin) continue;
          layers[l](y, x) =
              static_cast<float>(hessian_response(ii, fx, fy, sizes[l]));
        }
      }
    }
    // 3x3x3 non-max suppression on the two interior layers.
    for (int l = 1; l + 1 < kLayers; ++l) {
      for (int y = 1; y + 1 < rh; ++y) {
        for (int x = 1; x + 1 < rw; ++x) {
          const float v = layers[l](y, x);
          if (v <= threshold) continue;
          bool is_max = true;
          for (int dl = -1; dl <= 1 && is_max; ++dl) {
            for (int dy = -1; dy <= 1 && is_max; ++dy) {
              for (int dx = -1; dx <= 1; ++dx) {
                if (dl == 0 && dy == 0 && dx == 0) continue;
                if (layers[l + dl](y + dy, x + dx) >= v) {
                  is_max = false;
                  break;
                }
              }
            }
          }
          if (!is_max) continue;
          Keypoint kp;
          kp.x = region.x0 + x;
          kp.y = region.y0 + y;
          kp.scale = 1.2 * sizes[l] / 9.0;
          kp.response = v;
          keypoints.push_back(kp);
        }
      }
    }
  }
  std::sort(keypoints.begin(), keypoints.end(),
            [](const Keypoint& a, const Keypoint& b) {
              if (a.response != b.response) return a.response > b.response;
              if (a.y != b.y) return a.y < b.y;
              if (a.x != b.x) return a.x < b.x;
              return a.scale < b.scale;
            });
  return keypoints;
}

namespace {

// Haar responses via box sums; coordinates clamp inside the integral image.
double haar_x(const IntegralImage& ii, int x, int y, int size) {
  const int half = size / 2;
  return (static_cast<double>(ii.box_sum(x, y - half, x + half, y + half)) -
          static_cast<double>(ii.box_sum(x - half, y - half, x, y + half))) /
         255.0;
}

double haar_y(const IntegralImage& ii, int x, int y, int size) {
  const int half = size / 2;
  return (static_cast<double>(ii.box_sum(x - half, y, x + half, y + half)) -
          static_cast<double>(ii.box_sum(x - half, y - half, x + half, y))) /
         255.0;
}

}  // namespace

std::vector<Descriptor> describe(const Frame& frame,
                                 const std::vector<Keypoint>& keypoints) {
  const IntegralImage ii(frame);
  std::vector<Descriptor> descriptors;
  descriptors.reserve(keypoints.size());

  for (const Keypoint& kp : keypoints) {
    const double s = std::max(1.0, kp.scale);
    const int haar = std::max(2, static_cast<int>(std::lround(2.0 * s)));
    Descriptor d = Descriptor::Zero();
    // 4x4 subregions, 5x5 samples each, spacing of one sigma.
    for (int sy = 0; sy < 4; ++sy) {
      for (int sx = 0; sx < 4; ++sx) {
        double sum_dx = 0.0, sum_dy = 0.0, sum_adx = 0.0, sum_ady = 0.0;
        for (int j = 0; j < 5; ++j) {
          for (int i = 0; i < 5; ++i) {
            const double u = (sx * 5 + i - 9.5) * s;
            const double v = (sy * 5 + j - 9.5) * s;
            const int px = static_cast<int>(std::lround(kp.x + u));
            const int py = static_cast<int>(std::lround(kp.y + v));
            const double g =
                std::exp(-(u * u + v * v) / (2.0 * (3.3 * s) * (3.3 * s)));
            const double dx = g * haar_x(ii, px, py, haar);
            const double dy = g * haar_y(ii, px, py, haar);
            sum_dx += dx;
            sum_dy += dy;
            sum_adx += std::abs(dx);
            sum_ady += std::abs(dy);
          }
        }
        const int base = (sy * 4 + sx) * 4;
        d(base + 0) = static_cast<float>(sum_dx);
        d(base + 1) = static_cast<float>(sum_dy);
        d(base + 2) = static_cast<float>(sum_adx);
        d(base + 3) = static_cast<float>(sum_ady);
      }
    }
    const float norm = d.norm();
    if (norm > 1e-12f) d /= norm;
    descriptors.push_back(d);
  }
  return descriptors;
}

std::vector<MatchPair> match(const std::vector<Descriptor>& desc_a,
                             const std::vector<Descriptor>& desc_b,
                             const std::vector<Keypoint>& kp_a,
                             const std::vector<Keypoint>& kp_b,
                             double ratio) {
  std::vector<MatchPair> out;
  if (desc_a.empty() || desc_b.empty()) return out;

  const int na = static_cast<int>(desc_a.size());
  const int nb = static_cast<int>(desc_b.size());

  std::vector<int> best_b_for_a(na, -1);
  std::vector<double> best_dist(na, 0.0);
  std::vector<int> best_a_for_b(nb, -1);
  std::vector<double> best_dist_b(nb, std::numeric_limits<double>::max());

  for (int a = 0; a < na; ++a) {
    double d1 = std::numeric_limits<double>::max();
    double d2 = std::numeric_limits<double>::max();
    int nearest = -1;
    for (int b = 0; b < nb; ++b) {
      const double d = (desc_a[a] - desc_b[b]).squaredNorm();
      if (d < d1) {
        d2 = d1;
        d1 = d;
        nearest = b;
      } else if (d < d2) {
        d2 = d;
      }
      if (d < best_dist_b[b]) {
        best_dist_b[b] = d;
        best_a_for_b[b] = a;
      }
    }
    // Ratio test on L2 distances (squared comparison).
    if (nearest >= 0 && (nb < 2 || d1 < ratio * ratio * d2)) {
      best_b_for_a[a] = nearest;
      best_dist[a] = std::sqrt(d1);
    }
  }
  for (int a = 0; a < na; ++a) {
    const int b = best_b_for_a[a];
    if (b < 0 || best_a_for_b[b] != a) continue;  // cross-check
    MatchPair m;
    m.index_a = a;
    m.index_b = b;
    m.distance = best_dist[a];
    m.ax = kp_a[a].x;
    m.ay = kp_a[a].y;
    m.bx = kp_b[b].x;
    m.by = kp_b[b].y;
    out.push_back(m);
  }
  return out;
}

namespace {

int count_inliers(const std::vector<MatchPair>& matches,
                  const SimilarityParams& p, double inlier_px,
                  std::vector<int>* indices, double* sse) {
  int count = 0;
  if (sse) *sse = 0.0;
  for (std::size_t i = 0; i < matches.size(); ++i) {
    const auto& m = matches[i];
    const double ex = p.s_x * m.ax + p.t_x - m.bx;
    const double ey = p.s_y * m.ay + p.t_y - m.by;
    const double e2 = ex * ex + ey * ey;
    if (e2 <= inlier_px * inlier_px) {
      ++count;
      if (indices) indices->push_back(static_cast<int>(i));
      if (sse) *sse += e2;
    }
  }
  return count;
}

// 1-D least squares of b = s*a + t over the inlier subset.
bool fit_axis(const std::vector<MatchPair>& matches,
              const std::vector<int>& idx, bool x_axis, double* s, double* t) {
  double sa = 0, sb = 0, saa = 0, sab = 0;
  const double n = static_cast<double>(idx.size());
  for (int i : idx) {
    const auto& m = matches[i];
    const double a = x_axis ? m.ax : m.ay;
    const double b = x_axis ? m.bx : m.by;
    sa += a;
    sb += b;
    saa += a * a;
    sab += a * b;
  }
  const double det = n * saa - sa * sa;
  if (std::abs(det) < 1e-9) return false;
  *s = (n * sab - sa * sb) / det;
  *t = (sb * saa - sa * sab) / det;
  return true;
}

}  // namespace

ScaleTranslationFit ransac_scale_translation(std::vector<MatchPair> matches,
                                             const RansacOptions& opts) {
  if (matches.size() < 2) {
    throw StitchError(ErrorCode::InsufficientMatches);
  }
  // Canonical order makes the fit independent of the input permutation.
  std::sort(matches.begin(), matches.end(),
            [](const MatchPair& a, const MatchPair& b) {
              return std::tie(a.ax, a.ay, a.bx, a.by, a.distance) <
                     std::tie(b.ax, b.ay, b.bx, b.by, b.distance);
            });

  std::mt19937_64 rng(opts.seed);
  std::uniform_int_distribution<std::size_t> pick(0, matches.size() - 1);

  SimilarityParams best;
  int best_count = -1;
  double best_sse = std::numeric_limits<double>::max();

  for (int it = 0; it < opts.iterations; ++it) {
    const std::size_t i = pick(rng);
    const std::size_t j = pick(rng);
    if (i == j) continue;
    const auto& m1 = matches[i];
    const auto& m2 = matches[j];
    const double dax = m2.ax - m1.ax;
    const double day = m2.ay - m1.ay;
    if (std::abs(dax) < 1e-9 || std::abs(day) < 1e-9) continue;

    SimilarityParams p;
    p.s_x = (m2.bx - m1.bx) / dax;
    p.s_y = (m2.by - m1.by) / day;
    p.t_x = m1.bx - p.s_x * m1.ax;
    p.t_y = m1.by - p.s_y * m1.ay;
    if (p.s_x < opts.min_scale || p.s_x > opts.max_scale ||
        p.s_y < opts.min_scale || p.s_y > opts.max_scale) {
      continue;
    }
    double sse = 0.0;
    const int count = count_inliers(matches, p, opts.inlier_px, nullptr, &sse);
    if (count > best_count || (count == best_count && sse < best_sse)) {
      best = p;
      best_count = count;
      best_sse = sse;
    }
  }

  std::vector<int> inliers;
  if (best_count > 0) count_inliers(matches, best, opts.inlier_px, &inliers, nullptr);
  const bool consensus =
      best_count >= 0 &&
      (inliers.size() * 2 >= matches.size() || inliers.size() >= 8);
  if (!consensus) {
    throw StitchError(ErrorCode::NoConsensus);
  }

  SimilarityParams refit = best;
  double s, t;
  if (fit_axis(matches, inliers, true, &s, &t)) {
    refit.s_x = s;
    refit.t_x = t;
  }
  if (fit_axis(matches, inliers, false, &s, &t)) {
    refit.s_y = s;
    refit.t_y = t;
  }

  ScaleTranslationFit fit;
  fit.params = refit;
  count_inliers(matches, refit, opts.inlier_px, &fit.inliers, nullptr);
  if (fit.inliers.empty()) fit.inliers = inliers;
  return fit;
}

}  // namespace stitch
