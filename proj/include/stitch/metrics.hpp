#pragma once

#include <string>
#include <vector>

#include "stitch/color_transfer.hpp"
#include "stitch/frame.hpp"
#include "stitch/report.hpp"

namespace stitch {

/// Peak signal-to-noise ratio in dB over the jointly valid pixels, channels
/// pooled. Identical inputs return +infinity. Throws ShapeMismatch or
/// EmptyRegion (no jointly valid pixel).
double psnr(const Frame& a, const Frame& b);

/// Mean SSIM on Rec. 601 luma: 11x11 Gaussian window (sigma 1.5),
/// C1 = (0.01*255)^2, C2 = (0.03*255)^2, averaged over window positions whose
/// support is fully inside the frame and jointly valid. Throws TooSmall when
/// either dimension is below the window size.
double ssim(const Frame& a, const Frame& b);

struct MetricRow {
  std::string scene_id;
  std::string frame_label;  // "1".."N", "mu", "sigma"
  std::string method;       // "2D-M" or "3D-M"
  double psnr_vs_source = 0.0;     // corrected overlap vs pre-correction self
  double psnr_vs_reference = 0.0;  // corrected overlap vs reference overlap
  double ssim_vs_reference = 0.0;
};

struct MetricTable {
  std::vector<MetricRow> rows;
};

/// Paired overlap crops of a sequence: source[t] is corrected toward
/// reference[t]. All frames of a stream share dimensions.
struct OverlapSequence {
  std::string scene_id;
  std::vector<Frame> source;
  std::vector<Frame> reference;
};

/// Runs the color-transfer chain over the sequence at the given window
/// length (1 = single-pair solve, 3 = temporal) and tabulates per-frame
/// metrics plus mu and sigma rows (population standard deviation).
MetricTable compare_methods(const OverlapSequence& seq, int window_mode);

/// Both window modes side by side (the Tables 2-3 shape).
MetricTable compare_methods_both(const OverlapSequence& seq);

struct TimingRow {
  std::string scene_id;
  StageTimes single_thread;
  StageTimes parallel;
  double single_total = 0.0;
  double parallel_total = 0.0;
  double speedup_ratio = 0.0;
};

struct TimingTable {
  std::vector<TimingRow> rows;
};

/// Stage/total/ratio table from a single-thread and a parallel run over the
/// same input. Throws InputMismatch when the runs disagree on scene or
/// frame count.
TimingTable timing_table(const RunReport& single_thread,
                         const RunReport& parallel);

// CSV with RFC-4180 quoting.
std::string to_csv(const MetricTable& table);
MetricTable metric_table_from_csv(const std::string& text);
std::string to_csv(const TimingTable& table);
TimingTable timing_table_from_csv(const std::string& text);

/// Splits one CSV document into unquoted cells (shared by the parsers).
std::vector<std::vector<std::string>> parse_csv(const std::string& text);
std::string csv_escape(const std::string& field);

}  // namespace stitch
