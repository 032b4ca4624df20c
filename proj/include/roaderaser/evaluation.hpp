// Copyright 2026 The RoadEraser Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Pixel-level obstacle metrics restricted to the road area: average
// precision, false-positive rate at 95% true-positive rate, and the curves
// behind them. Pixels sharing a score always change side together (a pixel
// is detected at threshold t iff score >= t).

#ifndef ROADERASER_EVALUATION_HPP_
#define ROADERASER_EVALUATION_HPP_

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "roaderaser/image.hpp"

namespace roaderaser {

// Score of a pixel that no threshold can detect (outside a predicted ROI).
inline constexpr double kUndetectable = -std::numeric_limits<double>::infinity();

// Cumulative counts after admitting every pixel with score >= threshold.
struct SweepPoint {
  double threshold = 0;
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
};

// Scores paired with 0/1 labels. Built once, then queried.
class ScoredPixels {
 public:
  ScoredPixels() = default;
  ScoredPixels(std::span<const double> scores, std::span<const std::uint8_t> labels);

  void append(double score, bool positive);
  // Concatenation; the result does not depend on merge order.
  void merge(const ScoredPixels& other);

  std::uint64_t positives() const { return positives_; }
  std::uint64_t negatives() const { return negatives_; }
  std::uint64_t undetectable_positives() const { return undetectable_positives_; }
  std::size_t size() const { return scores_.size(); }

  // One entry per distinct finite score, descending.
  std::vector<SweepPoint> sweep() const;

 private:
  std::vector<double> scores_;
  std::vector<std::uint8_t> labels_;
  std::uint64_t positives_ = 0;
  std::uint64_t negatives_ = 0;
  std::uint64_t undetectable_positives_ = 0;
};

struct ApResult {
  std::optional<double> ap;  // empty when there are no positives
  bool no_positives = false;
  bool no_negatives = false;
};

struct FprResult {
  double fpr = 1.0;
  bool reachable = false;
  double threshold = 0;  // operating threshold when reachable
  bool no_positives = false;
  bool no_negatives = false;
};

// Step-wise area under the precision-recall curve, sum_k (R_k - R_{k-1}) P_k.
ApResult average_precision(const ScoredPixels& pixels);
ApResult average_precision(std::span<const double> scores, std::span<const std::uint8_t> labels);

// Lowest FPR over thresholds whose TPR reaches `tpr_target`; (1.0, false)
// when none does.
FprResult fpr_at_tpr(const ScoredPixels& pixels, double tpr_target = 0.95);
FprResult fpr_at_tpr(std::span<const double> scores, std::span<const std::uint8_t> labels,
                     double tpr_target = 0.95);

struct CurvePoint {
  double x = 0;  // recall (PR) or FPR (ROC)
  double y = 0;  // precision (PR) or TPR (ROC)
  double threshold = 0;
  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

// PR points down to the first threshold reaching full recall.
std::vector<CurvePoint> pr_curve(const ScoredPixels& pixels);
// ROC points starting at (0, 0).
std::vector<CurvePoint> roc_curve(const ScoredPixels& pixels);

struct EvalFrame {
  std::string id;
  Heatmap heatmap;
  Mask labels;  // 0 background, 1 obstacle, 255 ignore
  Mask roi;     // ground-truth road area; defines the valid pixels
  // When set, pixels outside it keep their place in the valid set but can
  // never be detected.
  std::optional<Mask> predicted_roi;
};

// Valid pixels of a frame (roi = 1, label != 255) with their scores.
ScoredPixels collect_pixels(const EvalFrame& frame);

struct MetricReport {
  std::optional<double> ap;
  double fpr95 = 1.0;
  bool tpr95_reachable = false;
  double threshold95 = 0;
  bool no_positives = false;
  bool no_negatives = false;
  double positive_fraction = 0;
  std::uint64_t positives = 0;
  std::uint64_t negatives = 0;
  std::uint64_t undetectable_positives = 0;
  std::vector<CurvePoint> pr;
  std::vector<CurvePoint> roc;

  nlohmann::json to_json(bool with_curves = false) const;
};

MetricReport make_report(const ScoredPixels& pixels);

struct FrameReport {
  std::string id;
  MetricReport report;
};

struct PooledReport {
  MetricReport pooled;
  std::vector<FrameReport> frames;
};

// Pixel pooling across frames; per-frame reports are kept for diagnostics.
PooledReport pool_frames(std::span<const EvalFrame> frames, int jobs = 1);

// Keeps at most `max_points`, always including the first and last points
// and every index listed in `keep`.
std::vector<CurvePoint> downsample_curve(std::span<const CurvePoint> curve,
                                         std::size_t max_points,
                                         std::span<const std::size_t> keep = {});

inline constexpr std::size_t kMaxCurvePoints = 2000;

// <dir>/pr_curve.csv, <dir>/roc_curve.csv and <dir>/curves.png.
void export_curves(const MetricReport& report, const std::filesystem::path& dir);

// <dir>/metrics.json (pooled + per-frame) and <dir>/metrics.csv.
void write_reports(const PooledReport& report, const std::filesystem::path& dir,
                   const nlohmann::json& extra = {});

}  // namespace roaderaser

#endif  // ROADERASER_EVALUATION_HPP_
