#include "stitch/metrics.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace stitch {

double psnr(const Frame& a, const Frame& b) {
  if (a.width != b.width || a.height != b.height) {
    throw StitchError(ErrorCode::ShapeMismatch);
  }
  long long n = 0;
  double sse = 0.0;
  for (int y = 0; y < a.height; ++y) {
    for (int x = 0; x < a.width; ++x) {
      if (!a.valid_at(x, y) || !b.valid_at(x, y)) continue;
      const std::uint8_t* pa = a.px(x, y);
      const std::uint8_t* pb = b.px(x, y);
      for (int c = 0; c < 3; ++c) {
        const double d = static_cast<double>(pa[c]) - pb[c];
        sse += d * d;
      }
      ++n;
    }
  }
  if (n == 0) throw StitchError(ErrorCode::EmptyRegion);
  const double mse = sse / (3.0 * static_cast<double>(n));
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

namespace {

constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;
constexpr double kC1 = (0.01 * 255.0) * (0.01 * 255.0);
constexpr double kC2 = (0.03 * 255.0) * (0.03 * 255.0);

std::array<double, kSsimWindow> gaussian_kernel() {
  std::array<double, kSsimWindow> k{};
  double sum = 0.0;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double d = i - (kSsimWindow - 1) / 2.0;
    k[i] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

using PlaneD =
    Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Separable Gaussian filter; only interior positions (full support) are read
// downstream, so zero padding at the borders is fine.
PlaneD gauss_filter(const PlaneD& src) {
  static const auto kernel = gaussian_kernel();
  const int w = static_cast<int>(src.cols());
  const int h = static_cast<int>(src.rows());
  const int r = kSsimWindow / 2;
  PlaneD tmp = PlaneD::Zero(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = r; x < w - r; ++x) {
      double acc = 0.0;
      for (int i = 0; i < kSsimWindow; ++i) acc += kernel[i] * src(y, x - r + i);
      tmp(y, x) = acc;
    }
  }
  PlaneD out = PlaneD::Zero(h, w);
  for (int y = r; y < h - r; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = 0; i < kSsimWindow; ++i) acc += kernel[i] * tmp(y - r + i, x);
      out(y, x) = acc;
    }
  }
  return out;
}

}  // namespace

double ssim(const Frame& a, const Frame& b) {
  if (a.width != b.width || a.height != b.height) {
    throw StitchError(ErrorCode::ShapeMismatch);
  }
  if (a.width < kSsimWindow || a.height < kSsimWindow) {
    throw StitchError(ErrorCode::TooSmall);
  }
  const int w = a.width;
  const int h = a.height;
  PlaneD la(h, w), lb(h, w);
  std::vector<std::uint8_t> joint(static_cast<std::size_t>(w) * h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const bool valid = a.valid_at(x, y) && b.valid_at(x, y);
      joint[static_cast<std::size_t>(y) * w + x] = valid;
      const std::uint8_t* pa = a.px(x, y);
      const std::uint8_t* pb = b.px(x, y);
      la(y, x) = valid ? 0.299 * pa[0] + 0.587 * pa[1] + 0.114 * pa[2] : 0.0;
      lb(y, x) = valid ? 0.299 * pb[0] + 0.587 * pb[1] + 0.114 * pb[2] : 0.0;
    }
  }
  // Window positions must have fully valid support.
  std::vector<std::uint32_t> integral(static_cast<std::size_t>(w + 1) * (h + 1),
                                      0);
  for (int y = 0; y < h; ++y) {
    std::uint32_t row = 0;
    for (int x = 0; x < w; ++x) {
      row += joint[static_cast<std::size_t>(y) * w + x];
      integral[static_cast<std::size_t>(y + 1) * (w + 1) + x + 1] =
          integral[static_cast<std::size_t>(y) * (w + 1) + x + 1] + row;
    }
  }
  auto window_valid = [&](int cx, int cy) {
    const int r = kSsimWindow / 2;
    const int x0 = cx - r, y0 = cy - r, x1 = cx + r + 1, y1 = cy + r + 1;
    const std::uint32_t count =
        integral[static_cast<std::size_t>(y1) * (w + 1) + x1] -
        integral[static_cast<std::size_t>(y0) * (w + 1) + x1] -
        integral[static_cast<std::size_t>(y1) * (w + 1) + x0] +
        integral[static_cast<std::size_t>(y0) * (w + 1) + x0];
    return count == static_cast<std::uint32_t>(kSsimWindow * kSsimWindow);
  };

  const PlaneD mu_a = gauss_filter(la);
  const PlaneD mu_b = gauss_filter(lb);
  const PlaneD aa = gauss_filter((la * la).eval());
  const PlaneD bb = gauss_filter((lb * lb).eval());
  const PlaneD ab = gauss_filter((la * lb).eval());

  const int r = kSsimWindow / 2;
  double sum = 0.0;
  long long count = 0;
  for (int y = r; y < h - r; ++y) {
    for (int x = r; x < w - r; ++x) {
      if (!window_valid(x, y)) continue;
      const double ma = mu_a(y, x);
      const double mb = mu_b(y, x);
      const double va = aa(y, x) - ma * ma;
      const double vb = bb(y, x) - mb * mb;
      const double cov = ab(y, x) - ma * mb;
      const double num = (2.0 * ma * mb + kC1) * (2.0 * cov + kC2);
      const double den = (ma * ma + mb * mb + kC1) * (va + vb + kC2);
      sum += num / den;
      ++count;
    }
  }
  if (count == 0) throw StitchError(ErrorCode::EmptyRegion);
  return sum / static_cast<double>(count);
}

namespace {

struct SeriesStats {
  double mu = 0.0;
  double sigma = 0.0;  // population
};

SeriesStats stats(const std::vector<double>& xs) {
  SeriesStats s;
  if (xs.empty()) return s;
  for (double x : xs) s.mu += x;
  s.mu /= static_cast<double>(xs.size());
  double acc = 0.0;
  for (double x : xs) acc += (x - s.mu) * (x - s.mu);
  s.sigma = std::sqrt(acc / static_cast<double>(xs.size()));
  return s;
}

}  // namespace

MetricTable compare_methods(const OverlapSequence& seq, int window_mode) {
  if (seq.source.size() < 2 || seq.source.size() != seq.reference.size()) {
    throw StitchError(ErrorCode::InputMismatch,
                      "sequence needs >= 2 paired frames");
  }
  const std::string method = window_mode == 1 ? "2D-M" : "3D-M";
  MetricTable table;
  TransferWindow window(window_mode);
  std::vector<double> col_psnr_src, col_psnr_ref, col_ssim;
  for (std::size_t t = 0; t < seq.source.size(); ++t) {
    const Frame& src = seq.source[t];
    const Frame& ref = seq.reference[t];
    TransferResult res = transfer_step(src, ref, src.full_region(),
                                       ref.full_region(), window);
    window = res.window;
    MetricRow row;
    row.scene_id = seq.scene_id;
    row.frame_label = std::to_string(t + 1);
    row.method = method;
    row.psnr_vs_source = psnr(res.corrected, src);
    row.psnr_vs_reference = psnr(res.corrected, ref);
    row.ssim_vs_reference = ssim(res.corrected, ref);
    col_psnr_src.push_back(row.psnr_vs_source);
    col_psnr_ref.push_back(row.psnr_vs_reference);
    col_ssim.push_back(row.ssim_vs_reference);
    table.rows.push_back(row);
  }
  const SeriesStats s1 = stats(col_psnr_src);
  const SeriesStats s2 = stats(col_psnr_ref);
  const SeriesStats s3 = stats(col_ssim);
  MetricRow mu{seq.scene_id, "mu", method, s1.mu, s2.mu, s3.mu};
  MetricRow sigma{seq.scene_id, "sigma", method, s1.sigma, s2.sigma, s3.sigma};
  table.rows.push_back(mu);
  table.rows.push_back(sigma);
  return table;
}

MetricTable compare_methods_both(const OverlapSequence& seq) {
  MetricTable table = compare_methods(seq, 1);
  const MetricTable ours = compare_methods(seq, 3);
  table.rows.insert(table.rows.end(), ours.rows.begin(), ours.rows.end());
  return table;
}

TimingTable timing_table(const RunReport& single_thread,
                         const RunReport& parallel) {
  if (single_thread.scene_id != parallel.scene_id ||
      single_thread.frames != parallel.frames) {
    throw StitchError(ErrorCode::InputMismatch,
                      "timing reports cover different inputs");
  }
  TimingRow row;
  row.scene_id = single_thread.scene_id;
  row.single_thread = single_thread.totals;
  row.parallel = parallel.totals;
  row.single_total = single_thread.totals.total();
  row.parallel_total = parallel.totals.total();
  row.speedup_ratio =
      row.parallel_total > 0.0 ? row.single_total / row.parallel_total : 0.0;
  TimingTable table;
  table.rows.push_back(row);
  return table;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      if (!field.empty() || !row.empty()) {
        row.push_back(std::move(field));
        field.clear();
        rows.push_back(std::move(row));
        row.clear();
      }
    } else if (c != '\r') {
      field += c;
    }
  }
  if (!field.empty() || !row.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

double parse_double(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  return std::stod(s);
}

}  // namespace

std::string to_csv(const MetricTable& table) {
  std::string out =
      "Scene,Frame,Method,PSNR vs source,PSNR vs reference,SSIM\r\n";
  for (const auto& r : table.rows) {
    out += csv_escape(r.scene_id) + "," + csv_escape(r.frame_label) + "," +
           csv_escape(r.method) + "," + format_double(r.psnr_vs_source) + "," +
           format_double(r.psnr_vs_reference) + "," +
           format_double(r.ssim_vs_reference) + "\r\n";
  }
  return out;
}

MetricTable metric_table_from_csv(const std::string& text) {
  MetricTable table;
  const auto rows = parse_csv(text);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != 6) throw StitchError(ErrorCode::InputMismatch, "bad CSV row");
    MetricRow m;
    m.scene_id = r[0];
    m.frame_label = r[1];
    m.method = r[2];
    m.psnr_vs_source = parse_double(r[3]);
    m.psnr_vs_reference = parse_double(r[4]);
    m.ssim_vs_reference = parse_double(r[5]);
    table.rows.push_back(m);
  }
  return table;
}

std::string to_csv(const TimingTable& table) {
  std::string out = "Scene";
  for (const char* stage : kStageNames) {
    out += std::string(",") + stage + " (single s)," + stage + " (parallel s)";
  }
  out += ",All time (single s),All time (parallel s),Speed-Up Ratio\r\n";
  for (const auto& r : table.rows) {
    out += csv_escape(r.scene_id);
    for (int s = 0; s < kStageCount; ++s) {
      out += "," + format_double(r.single_thread.seconds[s]) + "," +
             format_double(r.parallel.seconds[s]);
    }
    out += "," + format_double(r.single_total) + "," +
           format_double(r.parallel_total) + "," +
           format_double(r.speedup_ratio) + "\r\n";
  }
  return out;
}

TimingTable timing_table_from_csv(const std::string& text) {
  TimingTable table;
  const auto rows = parse_csv(text);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != static_cast<std::size_t>(2 * kStageCount + 4)) {
      throw StitchError(ErrorCode::InputMismatch, "bad CSV row");
    }
    TimingRow t;
    t.scene_id = r[0];
    for (int s = 0; s < kStageCount; ++s) {
      t.single_thread.seconds[s] = parse_double(r[1 + 2 * s]);
      t.parallel.seconds[s] = parse_double(r[2 + 2 * s]);
    }
    t.single_total = parse_double(r[1 + 2 * kStageCount]);
    t.parallel_total = parse_double(r[2 + 2 * kStageCount]);
    t.speedup_ratio = parse_double(r[3 + 2 * kStageCount]);
    table.rows.push_back(t);
  }
  return table;
}

}  // namespace stitch
