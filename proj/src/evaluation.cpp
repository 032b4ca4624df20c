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

#include "roaderaser/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>
#include <fmt/os.h>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "roaderaser/parallel.hpp"

namespace roaderaser {

ScoredPixels::ScoredPixels(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("ScoredPixels: size mismatch");
  scores_.reserve(scores.size());
  labels_.reserve(labels.size());
  for (std::size_t i = 0; i < scores.size(); ++i) append(scores[i], labels[i] != 0);
}

void ScoredPixels::append(double score, bool positive) {
  if (std::isnan(score)) throw std::invalid_argument("ScoredPixels: NaN score");
  scores_.push_back(score);
  labels_.push_back(positive ? 1 : 0);
  if (positive) {
    ++positives_;
    if (score == kUndetectable) ++undetectable_positives_;
  } else {
    ++negatives_;
  }
}

void ScoredPixels::merge(const ScoredPixels& other) {
  scores_.insert(scores_.end(), other.scores_.begin(), other.scores_.end());
  labels_.insert(labels_.end(), other.labels_.begin(), other.labels_.end());
  positives_ += other.positives_;
  negatives_ += other.negatives_;
  undetectable_positives_ += other.undetectable_positives_;
}

std::vector<SweepPoint> ScoredPixels::sweep() const {
  std::vector<std::pair<double, std::uint8_t>> order;
  order.reserve(scores_.size());
  for (std::size_t i = 0; i < scores_.size(); ++i) {
    if (scores_[i] != kUndetectable) order.emplace_back(scores_[i], labels_[i]);
  }
  std::sort(order.begin(), order.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<SweepPoint> points;
  SweepPoint running;
  for (std::size_t i = 0; i < order.size();) {
    const double t = order[i].first;
    for (; i < order.size() && order[i].first == t; ++i) {
      if (order[i].second) {
        ++running.tp;
      } else {
        ++running.fp;
      }
    }
    running.threshold = t;
    points.push_back(running);
  }
  return points;
}

ApResult average_precision(const ScoredPixels& pixels) {
  ApResult r;
  r.no_positives = pixels.positives() == 0;
  r.no_negatives = pixels.negatives() == 0;
  if (r.no_positives) return r;
  if (r.no_negatives) {
    r.ap = 1.0;
    return r;
  }
  const double positives = static_cast<double>(pixels.positives());
  double ap = 0.0, previous_recall = 0.0;
  for (const SweepPoint& p : pixels.sweep()) {
    const double recall = static_cast<double>(p.tp) / positives;
    const double precision = static_cast<double>(p.tp) / static_cast<double>(p.tp + p.fp);
    ap += (recall - previous_recall) * precision;
    previous_recall = recall;
  }
  r.ap = ap;
  return r;
}

ApResult average_precision(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  return average_precision(ScoredPixels(scores, labels));
}

FprResult fpr_at_tpr(const ScoredPixels& pixels, double tpr_target) {
  FprResult r;
  r.no_positives = pixels.positives() == 0;
  r.no_negatives = pixels.negatives() == 0;
  if (r.no_positives) return r;
  const double positives = static_cast<double>(pixels.positives());
  for (const SweepPoint& p : pixels.sweep()) {
    if (static_cast<double>(p.tp) / positives >= tpr_target) {
      r.reachable = true;
      r.threshold = p.threshold;
      r.fpr = r.no_negatives ? 0.0
                             : static_cast<double>(p.fp) / static_cast<double>(pixels.negatives());
      return r;
    }
  }
  return r;
}

FprResult fpr_at_tpr(std::span<const double> scores, std::span<const std::uint8_t> labels,
                     double tpr_target) {
  return fpr_at_tpr(ScoredPixels(scores, labels), tpr_target);
}

std::vector<CurvePoint> pr_curve(const ScoredPixels& pixels) {
  std::vector<CurvePoint> curve;
  if (pixels.positives() == 0) return curve;
  const double positives = static_cast<double>(pixels.positives());
  for (const SweepPoint& p : pixels.sweep()) {
    curve.push_back({static_cast<double>(p.tp) / positives,
                     static_cast<double>(p.tp) / static_cast<double>(p.tp + p.fp), p.threshold});
    if (p.tp == pixels.positives()) break;
  }
  return curve;
}

std::vector<CurvePoint> roc_curve(const ScoredPixels& pixels) {
  std::vector<CurvePoint> curve{{0.0, 0.0, std::numeric_limits<double>::infinity()}};
  const auto rate = [](std::uint64_t k, std::uint64_t n) {
    return n == 0 ? 0.0 : static_cast<double>(k) / static_cast<double>(n);
  };
  for (const SweepPoint& p : pixels.sweep()) {
    curve.push_back({rate(p.fp, pixels.negatives()), rate(p.tp, pixels.positives()), p.threshold});
  }
  return curve;
}

ScoredPixels collect_pixels(const EvalFrame& frame) {
  if (!frame.heatmap.same_shape(frame.labels) || !frame.heatmap.same_shape(frame.roi) ||
      (frame.predicted_roi && !frame.heatmap.same_shape(*frame.predicted_roi))) {
    throw std::invalid_argument(fmt::format("frame {}: heatmap, labels and ROI differ in size",
                                            frame.id));
  }
  ScoredPixels pixels;
  for (int y = 0; y < frame.labels.height(); ++y) {
    for (int x = 0; x < frame.labels.width(); ++x) {
      const std::uint8_t label = frame.labels.at(x, y);
      if (!frame.roi.at(x, y) || label == kIgnoreLabel) continue;
      const bool detectable = !frame.predicted_roi || frame.predicted_roi->at(x, y);
      pixels.append(detectable ? static_cast<double>(frame.heatmap.at(x, y)) : kUndetectable,
                    label != 0);
    }
  }
  return pixels;
}

MetricReport make_report(const ScoredPixels& pixels) {
  MetricReport r;
  const ApResult ap = average_precision(pixels);
  const FprResult fpr = fpr_at_tpr(pixels);
  r.ap = ap.ap;
  r.fpr95 = fpr.fpr;
  r.tpr95_reachable = fpr.reachable;
  r.threshold95 = fpr.threshold;
  r.no_positives = ap.no_positives;
  r.no_negatives = ap.no_negatives;
  r.positives = pixels.positives();
  r.negatives = pixels.negatives();
  r.undetectable_positives = pixels.undetectable_positives();
  const std::uint64_t total = r.positives + r.negatives;
  r.positive_fraction = total ? static_cast<double>(r.positives) / static_cast<double>(total) : 0.0;
  r.pr = pr_curve(pixels);
  r.roc = roc_curve(pixels);
  return r;
}

nlohmann::json MetricReport::to_json(bool with_curves) const {
  nlohmann::json j = {{"ap", ap ? nlohmann::json(*ap) : nlohmann::json(nullptr)},
                      {"fpr95", fpr95},
                      {"tpr95_reachable", tpr95_reachable},
                      {"threshold95", threshold95},
                      {"no_positives", no_positives},
                      {"no_negatives", no_negatives},
                      {"positive_fraction", positive_fraction},
                      {"positives", positives},
                      {"negatives", negatives},
                      {"undetectable_positives", undetectable_positives}};
  if (with_curves) {
    const auto points = [](const std::vector<CurvePoint>& c) {
      auto arr = nlohmann::json::array();
      for (const auto& p : c) arr.push_back({p.x, p.y});
      return arr;
    };
    j["pr_curve"] = points(pr);
    j["roc_curve"] = points(roc);
  }
  return j;
}

PooledReport pool_frames(std::span<const EvalFrame> frames, int jobs) {
  if (frames.empty()) throw std::invalid_argument("pool_frames: no frames");
  std::vector<ScoredPixels> per_frame(frames.size());
  PooledReport out;
  out.frames.resize(frames.size());
  parallel_for(frames.size(), jobs, [&](std::size_t i) {
    per_frame[i] = collect_pixels(frames[i]);
    out.frames[i] = {frames[i].id, make_report(per_frame[i])};
  });
  ScoredPixels pooled;
  for (const auto& p : per_frame) pooled.merge(p);
  out.pooled = make_report(pooled);
  return out;
}

std::vector<CurvePoint> downsample_curve(std::span<const CurvePoint> curve,
                                         std::size_t max_points,
                                         std::span<const std::size_t> keep) {
  if (curve.size() <= max_points) return {curve.begin(), curve.end()};
  if (max_points < 2 + keep.size()) {
    throw std::invalid_argument("downsample_curve: too few points for the required ones");
  }
  std::vector<std::size_t> chosen{0, curve.size() - 1};
  for (std::size_t k : keep) {
    if (k < curve.size()) chosen.push_back(k);
  }
  const std::size_t budget = max_points - chosen.size();
  const double step = static_cast<double>(curve.size() - 1) / static_cast<double>(budget + 1);
  for (std::size_t i = 1; i <= budget; ++i) {
    chosen.push_back(static_cast<std::size_t>(std::llround(step * static_cast<double>(i))));
  }
  std::sort(chosen.begin(), chosen.end());
  chosen.erase(std::unique(chosen.begin(), chosen.end()), chosen.end());
  std::vector<CurvePoint> out;
  out.reserve(chosen.size());
  for (std::size_t i : chosen) out.push_back(curve[i]);
  return out;
}

namespace {

void write_curve_csv(const std::filesystem::path& path, const char* header,
                     std::span<const CurvePoint> curve) {
  auto out = fmt::output_file(path.string());
  out.print("{}\n", header);
  for (const auto& p : curve) out.print("{:.17g},{:.17g},{:.17g}\n", p.x, p.y, p.threshold);
}

void draw_panel(cv::Mat& canvas, int x0, std::span<const CurvePoint> curve, const char* title,
                const char* xlabel, const char* ylabel) {
  constexpr int kSize = 360, kMargin = 50;
  const cv::Scalar black(0, 0, 0), gray(200, 200, 200), blue(180, 80, 20);
  const cv::Point origin(x0 + kMargin, kMargin + kSize);
  const auto to_px = [&](double x, double y) {
    return cv::Point(origin.x + static_cast<int>(std::lround(x * kSize)),
                     origin.y - static_cast<int>(std::lround(y * kSize)));
  };
  for (int i = 1; i < 5; ++i) {
    cv::line(canvas, to_px(i / 5.0, 0), to_px(i / 5.0, 1), gray, 1);
    cv::line(canvas, to_px(0, i / 5.0), to_px(1, i / 5.0), gray, 1);
  }
  cv::rectangle(canvas, to_px(0, 1), to_px(1, 0), black, 1);
  std::vector<cv::Point> pts;
  pts.reserve(curve.size());
  for (const auto& p : curve) pts.push_back(to_px(p.x, p.y));
  if (pts.size() == 1) cv::circle(canvas, pts[0], 3, blue, cv::FILLED, cv::LINE_AA);
  if (pts.size() > 1) cv::polylines(canvas, pts, false, blue, 2, cv::LINE_AA);
  const int font = cv::FONT_HERSHEY_SIMPLEX;
  cv::putText(canvas, title, {x0 + kMargin, 30}, font, 0.6, black, 1, cv::LINE_AA);
  cv::putText(canvas, xlabel, {x0 + kMargin + kSize / 2 - 20, kMargin + kSize + 35}, font, 0.5,
              black, 1, cv::LINE_AA);
  cv::putText(canvas, ylabel, {x0 + 5, kMargin + kSize / 2}, font, 0.5, black, 1, cv::LINE_AA);
  cv::putText(canvas, "0", {origin.x - 12, origin.y + 15}, font, 0.4, black, 1, cv::LINE_AA);
  cv::putText(canvas, "1", {origin.x + kSize - 4, origin.y + 15}, font, 0.4, black, 1, cv::LINE_AA);
  cv::putText(canvas, "1", {origin.x - 14, kMargin + 4}, font, 0.4, black, 1, cv::LINE_AA);
}

}  // namespace

void export_curves(const MetricReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const std::vector<CurvePoint> pr = downsample_curve(report.pr, kMaxCurvePoints);
  std::vector<std::size_t> keep;
  if (report.tpr95_reachable) {
    for (std::size_t i = 0; i < report.roc.size(); ++i) {
      if (report.roc[i].threshold == report.threshold95) {
        keep.push_back(i);
        break;
      }
    }
  }
  const std::vector<CurvePoint> roc = downsample_curve(report.roc, kMaxCurvePoints, keep);
  write_curve_csv(dir / "pr_curve.csv", "recall,precision,threshold", pr);
  write_curve_csv(dir / "roc_curve.csv", "fpr,tpr,threshold", roc);

  cv::Mat canvas(460, 920, CV_8UC3, cv::Scalar(255, 255, 255));
  draw_panel(canvas, 0, pr, "Precision-Recall", "recall", "P");
  draw_panel(canvas, 460, roc, "ROC", "FPR", "TPR");
  if (!cv::imwrite((dir / "curves.png").string(), canvas)) {
    throw std::runtime_error(fmt::format("cannot write {}", (dir / "curves.png").string()));
  }
}

void write_reports(const PooledReport& report, const std::filesystem::path& dir,
                   const nlohmann::json& extra) {
  std::filesystem::create_directories(dir);
  nlohmann::json j;
  j["pooled"] = report.pooled.to_json();
  auto& frames = j["frames"] = nlohmann::json::array();
  for (const auto& f : report.frames) {
    nlohmann::json entry = f.report.to_json();
    entry["id"] = f.id;
    frames.push_back(std::move(entry));
  }
  if (!extra.is_null()) j["run"] = extra;
  {
    auto out = fmt::output_file((dir / "metrics.json").string());
    out.print("{}\n", j.dump(2));
  }
  auto csv = fmt::output_file((dir / "metrics.csv").string());
  csv.print("frame,ap,fpr95,tpr95_reachable,positives,negatives,positive_fraction\n");
  const auto row = [&](const std::string& id, const MetricReport& r) {
    csv.print("{},{},{:.17g},{},{},{},{:.17g}\n", id, r.ap ? fmt::format("{:.17g}", *r.ap) : "",
              r.fpr95, r.tpr95_reachable ? 1 : 0, r.positives, r.negatives, r.positive_fraction);
  };
  row("pooled", report.pooled);
  for (const auto& f : report.frames) row(f.id, f.report);
}

}  // namespace roaderaser
