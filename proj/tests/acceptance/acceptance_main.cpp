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

// Acceptance checks. Usage: roaderaser_acceptance <1-9|all> [work_dir]
// Prints one PASS/FAIL line per criterion; exits nonzero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "../oracles.hpp"
#include "roaderaser/discrepancy_model.hpp"
#include "roaderaser/drivable_area.hpp"
#include "roaderaser/evaluation.hpp"
#include "roaderaser/inpaint_fusion.hpp"
#include "roaderaser/nn/layers.hpp"
#include "roaderaser/pipeline.hpp"

namespace roaderaser {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int uniform(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

Mask random_roi(std::mt19937_64& rng, int w, int h) {
  Mask roi = make_mask(w, h);
  const int blobs = uniform(rng, 1, 4);
  for (int b = 0; b < blobs; ++b) {
    const int cx = uniform(rng, 0, w - 1), cy = uniform(rng, 0, h - 1);
    const int rx = uniform(rng, 1, std::max(2, w / 3)), ry = uniform(rng, 1, std::max(2, h / 3));
    for (int y = std::max(0, cy - ry); y < std::min(h, cy + ry); ++y) {
      for (int x = std::max(0, cx - rx); x < std::min(w, cx + rx); ++x) roi.at(x, y) = 1;
    }
  }
  return roi;
}

RgbImage random_pixels(std::mt19937_64& rng, int w, int h) {
  std::uniform_real_distribution<float> value(0.0f, 1.0f);
  RgbImage img = make_rgb(w, h);
  for (float& v : img.storage()) v = value(rng);
  return img;
}

// ---------------------------------------------------------------------------

Outcome fusion_oracle() {
  const auto start = Clock::now();
  std::mt19937_64 rng(101);
  double max_err = 0, max_weight_dev = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int w = uniform(rng, 8, 128), h = uniform(rng, 8, 128);
    std::vector<InpaintResult> results;
    if (trial % 2 == 0) {
      // Free-standing square windows.
      const int count = uniform(rng, 1, 10);
      for (int i = 0; i < count; ++i) {
        const int s = uniform(rng, 3, std::min(w, h));
        const int x0 = uniform(rng, 0, w - s), y0 = uniform(rng, 0, h - s);
        const PatchWindow win{{x0 + s / 2, y0 + s / 2}, {x0, y0, s, s}, {0, 0, w, h}, s};
        results.push_back({win, random_pixels(rng, s, s)});
      }
    } else {
      // Planned windows, border-clamped ones included.
      const int side = uniform(rng, 8, 64);
      auto windows = plan_windows(random_roi(rng, w, h), side, 0.7);
      if (windows.size() > 10) windows.resize(10);
      for (const auto& win : windows) {
        results.push_back({win, random_pixels(rng, win.inpaint_box.width, win.inpaint_box.height)});
      }
    }
    const RgbImage fallback = random_pixels(rng, w, h);
    const FusedImage fused = fuse(results, fallback);
    const RgbImage ref = oracle::fuse(results, fallback);
    for (std::size_t i = 0; i < ref.data().size(); ++i) {
      max_err = std::max(max_err, std::abs(double(fused.image.data()[i]) - ref.data()[i]));
    }
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        std::vector<double> weights;
        for (const auto& r : results) {
          if (r.window.inpaint_box.contains(x, y)) weights.push_back(fusion_weight({x, y}, r.window));
        }
        if (weights.empty()) continue;
        double total = 0;
        for (double v : weights) total += v;
        double normalized = 0;
        for (double v : weights) normalized += total > 0 ? v / total : 1.0 / weights.size();
        max_weight_dev = std::max(max_weight_dev, std::abs(normalized - 1.0));
      }
    }
  }
  const double secs = seconds_since(start);
  return {max_err <= 1e-6 && max_weight_dev <= 1e-6 && secs < 30.0,
          fmt::format("200 instances, max |fuse - oracle| = {:.3g}, max |sum w - 1| = {:.3g}, {:.1f} s",
                      max_err, max_weight_dev, secs)};
}

// ---------------------------------------------------------------------------

Outcome window_coverage() {
  std::mt19937_64 rng(202);
  const int stride = window_stride(kDefaultPatchSide, kDefaultOverlap);
  std::size_t uncovered = 0, off_grid = 0, windows_seen = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int w = uniform(rng, 60, 900), h = uniform(rng, 40, 600);
    const Mask roi = random_roi(rng, w, h);
    Mask covered = make_mask(w, h);
    const auto windows = plan_windows(roi);
    windows_seen += windows.size();
    for (const auto& win : windows) {
      const Box& b = win.inpaint_box;
      for (int y = b.y0; y < b.y1(); ++y) {
        for (int x = b.x0; x < b.x1(); ++x) covered.at(x, y) = 1;
      }
      // Origins sit on the stride grid unless clamped against the far border.
      const bool x_ok = b.x0 % stride == 0 || b.x1() == w;
      const bool y_ok = b.y0 % stride == 0 || b.y1() == h;
      if (!x_ok || !y_ok) ++off_grid;
    }
    for (std::size_t i = 0; i < roi.data().size(); ++i) {
      if (roi.data()[i] && !covered.data()[i]) ++uncovered;
    }
  }
  // A full 1000x700 ROI: interior neighbours exactly one stride apart.
  const auto grid = plan_windows(make_mask(1000, 700, 1));
  std::set<int> xs, ys;
  for (const auto& win : grid) {
    xs.insert(win.inpaint_box.x0);
    ys.insert(win.inpaint_box.y0);
  }
  const auto steps_ok = [&](const std::set<int>& origins, int length) {
    std::vector<int> v(origins.begin(), origins.end());
    for (std::size_t i = 1; i < v.size(); ++i) {
      const bool last = i + 1 == v.size() && v[i] == length - kDefaultPatchSide;
      if (!last && v[i] - v[i - 1] != 60) return false;
    }
    return v.front() == 0;
  };
  const bool grid_ok = steps_ok(xs, 1000) && steps_ok(ys, 700);
  return {uncovered == 0 && off_grid == 0 && stride == 60 && grid_ok,
          fmt::format("100 ROIs, {} windows, {} uncovered ROI pixels, {} off-grid windows, "
                      "stride {}, interior spacing {}",
                      windows_seen, uncovered, off_grid, stride, grid_ok ? "60" : "wrong")};
}

// ---------------------------------------------------------------------------

Outcome metric_oracle() {
  std::mt19937_64 rng(303);
  double max_ap = 0, max_fpr = 0;
  std::size_t reach_mismatch = 0, transform_mismatch = 0, prevalence_mismatch = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = static_cast<std::size_t>(uniform(rng, 2, 10000));
    // Coarse score grids keep ties common; the oracle cost is levels x n.
    const int levels = uniform(rng, 1, std::max<int>(1, static_cast<int>(2'000'000 / n)));
    const double prevalence = std::uniform_real_distribution<double>(0.01, 0.6)(rng);
    std::bernoulli_distribution positive(prevalence);
    std::vector<double> scores(n);
    std::vector<std::uint8_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      labels[i] = positive(rng);
      const int l = std::min(levels, uniform(rng, 0, levels) + (labels[i] ? levels / 3 : 0));
      scores[i] = static_cast<double>(l) / levels;
    }
    labels[0] = 1;
    labels[1] = 0;
    const ApResult ap = average_precision(scores, labels);
    const FprResult fpr = fpr_at_tpr(scores, labels);
    const oracle::SweepMetrics ref = oracle::threshold_sweep(scores, labels);
    max_ap = std::max(max_ap, std::abs(*ap.ap - ref.ap));
    max_fpr = std::max(max_fpr, std::abs(fpr.fpr - ref.fpr95));
    if (fpr.reachable != ref.reachable) ++reach_mismatch;

    std::vector<double> warped(n);
    for (std::size_t i = 0; i < n; ++i) warped[i] = std::exp(3.0 * scores[i]) - 7.0;
    const ApResult ap2 = average_precision(warped, labels);
    const FprResult fpr2 = fpr_at_tpr(warped, labels);
    if (*ap2.ap != *ap.ap || fpr2.fpr != fpr.fpr || fpr2.reachable != fpr.reachable) {
      ++transform_mismatch;
    }

    const std::vector<double> constant(n, 0.25);
    std::size_t pos = 0;
    for (auto l : labels) pos += l;
    if (*average_precision(constant, labels).ap != static_cast<double>(pos) / n) {
      ++prevalence_mismatch;
    }
  }
  return {max_ap <= 1e-12 && max_fpr <= 1e-12 && reach_mismatch == 0 && transform_mismatch == 0 &&
              prevalence_mismatch == 0,
          fmt::format("500 instances, max |AP - oracle| = {:.3g}, max |FPR95 - oracle| = {:.3g}, "
                      "{} reachability, {} monotone-transform and {} constant-score mismatches",
                      max_ap, max_fpr, reach_mismatch, transform_mismatch, prevalence_mismatch)};
}

// ---------------------------------------------------------------------------

Outcome unreachable_tpr() {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<float> neg_score(0.05f, 0.6f);
  std::vector<EvalFrame> frames;
  std::size_t positives = 0, outside = 0;
  for (int f = 0; f < 4; ++f) {
    const int w = 40, h = 30;
    EvalFrame frame;
    frame.id = fmt::format("f{}", f);
    frame.heatmap = make_heatmap(w, h);
    frame.labels = make_mask(w, h);
    frame.roi = make_mask(w, h, 1);
    frame.predicted_roi = make_mask(w, h, 1);
    // Predicted road ends at column 36; 10 of the 100 obstacle pixels lie beyond.
    for (int y = 0; y < h; ++y) {
      for (int x = 36; x < w; ++x) frame.predicted_roi->at(x, y) = 0;
    }
    for (int i = 0; i < 90; ++i) frame.labels.at(5 + i % 30, 5 + i / 30) = 1;
    for (int i = 0; i < 10; ++i) frame.labels.at(36 + i % 4, 20 + i / 4) = 1;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const bool pos = frame.labels.at(x, y) == 1;
        positives += pos;
        const bool inside = frame.predicted_roi->at(x, y) != 0;
        if (pos && !inside) ++outside;
        if (!inside) continue;  // scored 0 outside the predicted road
        frame.heatmap.at(x, y) = pos ? 0.9f : neg_score(rng);
      }
    }
    frames.push_back(std::move(frame));
  }
  const PooledReport report = pool_frames(frames);
  const double max_recall = report.pooled.pr.empty() ? 0.0 : report.pooled.pr.back().x;
  const bool pass = !report.pooled.tpr95_reachable && report.pooled.fpr95 == 1.0 &&
                    outside * 10 == positives;
  return {pass, fmt::format("{}/{} positives outside the predicted ROI, best TPR {:.3f}, "
                            "tpr95_reachable={}, fpr95={}",
                            outside, positives, max_recall, report.pooled.tpr95_reachable,
                            report.pooled.fpr95)};
}

// ---------------------------------------------------------------------------

Outcome bce_gradient() {
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> p(0.02, 0.98);
  double max_rel = 0;
  std::size_t checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int w = uniform(rng, 1, 8), h = uniform(rng, 1, 8);
    const std::size_t n = static_cast<std::size_t>(w) * h;
    std::vector<double> pred(n);
    std::vector<std::uint8_t> target(n), roi(n);
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] = p(rng);
      const int t = uniform(rng, 0, 9);
      target[i] = t == 0 ? kIgnoreLabel : (t < 4 ? 1 : 0);
      roi[i] = uniform(rng, 0, 7) != 0;
    }
    const double pos_weight = std::uniform_real_distribution<double>(1.0, 30.0)(rng);
    const BceResult r = weighted_bce(pred, target, roi, pos_weight);
    if (r.no_valid_pixels) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const double step = 1e-6;
      std::vector<double> hi = pred, lo = pred;
      hi[i] += step;
      lo[i] -= step;
      const double numeric = (weighted_bce(hi, target, roi, pos_weight).loss -
                              weighted_bce(lo, target, roi, pos_weight).loss) / (2 * step);
      const double scale = std::max(std::abs(numeric), std::abs(r.grad[i]));
      const double rel = scale > 1e-10 ? std::abs(numeric - r.grad[i]) / scale : 0.0;
      max_rel = std::max(max_rel, rel);
      ++checked;
    }
  }
  return {max_rel < 1e-4, fmt::format("{} partial derivatives, max relative error {:.3g}",
                                      checked, max_rel)};
}

// ---------------------------------------------------------------------------

Outcome architecture() {
  std::mt19937_64 rng(606);
  const DiscrepancyModel model(ModelConfig::small(), 7);
  std::size_t shape_bad = 0, range_bad = 0, leak = 0;
  for (const auto& [w, h] : {std::pair{37, 21}, {64, 32}, {50, 50}, {17, 33}, {96, 48}}) {
    const Mask roi = random_roi(rng, w, h);
    const Heatmap out = model.forward(random_pixels(rng, w, h), random_pixels(rng, w, h), roi);
    if (out.width() != w || out.height() != h || out.channels() != 1) ++shape_bad;
    for (std::size_t i = 0; i < out.data().size(); ++i) {
      const float v = out.data()[i];
      if (!(v >= 0.0f && v <= 1.0f)) ++range_bad;
      if (!roi.data()[i] && v != 0.0f) ++leak;
    }
  }
  double max_corr_err = 0, max_self_dev = 0;
  std::normal_distribution<float> gauss(0.0f, 1.0f);
  for (int trial = 0; trial < 50; ++trial) {
    const int c = uniform(rng, 1, 32), hh = uniform(rng, 1, 12), ww = uniform(rng, 1, 12);
    nn::Tensor a(c, hh, ww), b(c, hh, ww);
    for (auto& v : a.data) v = gauss(rng);
    for (auto& v : b.data) v = gauss(rng);
    const nn::Tensor ab = nn::pointwise_correlation(a, b);
    const nn::Tensor aa = nn::pointwise_correlation(a, a);
    for (int y = 0; y < hh; ++y) {
      for (int x = 0; x < ww; ++x) {
        max_corr_err = std::max(max_corr_err, std::abs(ab.at(0, y, x) - oracle::correlation_at(a, b, y, x)));
        max_corr_err = std::max(max_corr_err, std::abs(aa.at(0, y, x) - oracle::correlation_at(a, a, y, x)));
        double norm2 = 0;
        for (int k = 0; k < c; ++k) norm2 += double(a.at(k, y, x)) * a.at(k, y, x);
        // The epsilon term only matters for vanishing features.
        if (norm2 >= 1e-2) max_self_dev = std::max(max_self_dev, std::abs(aa.at(0, y, x) - 1.0));
      }
    }
  }
  return {shape_bad == 0 && range_bad == 0 && leak == 0 && max_corr_err <= 1e-6 &&
              max_self_dev <= 1e-6,
          fmt::format("5 input sizes: {} shape, {} range and {} outside-ROI violations; "
                      "correlation max error {:.3g}, self-correlation (|a| >= 0.1) max |c - 1| {:.3g}",
                      shape_bad, range_bad, leak, max_corr_err, max_self_dev)};
}

// ---------------------------------------------------------------------------

PipelineConfig toy_config(const fs::path& root) {
  PipelineConfig cfg = PipelineConfig::load(fs::path(ROADERASER_SOURCE_DIR) / "configs" / "toy.yaml");
  cfg.output_dir = (root / "runs").string();
  cfg.data_dir = (root / "data" / "train").string();
  cfg.eval_dir = (root / "data" / "test").string();
  return cfg;
}

PipelineConfig benchmark_config(PipelineConfig cfg, int frames) {
  cfg.data_kind = "benchmark";
  cfg.data_dir = cfg.eval_dir;
  cfg.toy_frames = frames;
  return cfg;
}

double pooled_ap(const PipelineConfig& cfg, Variant v) {
  PipelineConfig c = cfg;
  c.variant = v;
  if (!cmd_infer(c).failed_frames.empty()) return 0.0;
  const auto ap = cmd_evaluate(c).summary["ap"];
  return ap.is_null() ? 0.0 : ap.get<double>();
}

Outcome toy_end_to_end(const fs::path& work) {
  const auto start = Clock::now();
  const fs::path root = work / "toy_end_to_end";
  fs::remove_all(root);
  const PipelineConfig cfg = toy_config(root);
  cmd_generate_data(cfg);
  cmd_generate_data(benchmark_config(cfg, 16));
  cmd_train(cfg);
  const double full = pooled_ap(cfg, Variant::kFull);
  const double l1 = pooled_ap(cfg, Variant::kNoDiscrepancy);
  const double secs = seconds_since(start);
  return {full >= 0.80 && full > l1 && secs <= 900.0,
          fmt::format("{} train / 16 test frames at {}x{}, {} epochs: AP full {:.4f}, "
                      "no_discrepancy {:.4f}, {:.0f} s",
                      cfg.toy_frames, cfg.toy_width, cfg.toy_height, cfg.train.epochs, full, l1, secs)};
}

// ---------------------------------------------------------------------------

Outcome enclosure() {
  const std::vector<int> road = {1, 2};
  std::size_t roi_bad = 0, seg_bad = 0;
  const auto check = [&](const LabelMap& m) {
    const Mask ref = oracle::flood_fill_roi(m, road);
    if (derive_roi(m, road).pixels != ref) ++roi_bad;
    const Heatmap seg = segmentation_alone_score(m, road);
    for (int y = 0; y < m.height(); ++y) {
      for (int x = 0; x < m.width(); ++x) {
        const bool is_road = m.at(x, y) == 1 || m.at(x, y) == 2;
        const float expected = ref.at(x, y) && !is_road ? 1.0f : 0.0f;
        if (seg.at(x, y) != expected) {
          ++seg_bad;
          return;
        }
      }
    }
  };
  std::mt19937_64 rng(808);
  for (int trial = 0; trial < 100; ++trial) {
    const double road_fraction = 0.5 + 0.05 * (trial % 6);
    std::bernoulli_distribution is_road(road_fraction);
    LabelMap m(32, 32, 1);
    for (auto& v : m.storage()) {
      v = static_cast<std::uint16_t>(is_road(rng) ? uniform(rng, 1, 2) : uniform(rng, 3, 6));
    }
    check(m);
  }
  // Annulus: a road ring around an island, and the same ring with a one-pixel
  // gap that joins the island to the border.
  LabelMap annulus(16, 16, 1, 5);
  for (int y = 2; y < 14; ++y) {
    for (int x = 2; x < 14; ++x) {
      if (x < 5 || x > 10 || y < 5 || y > 10) annulus.at(x, y) = 1;
    }
  }
  check(annulus);
  const bool island_in = derive_roi(annulus, road).pixels.at(8, 8) == 1;
  LabelMap gap = annulus;
  for (int x = 0; x < 8; ++x) gap.at(x, 8) = 5;
  check(gap);
  const bool gap_out = derive_roi(gap, road).pixels.at(8, 8) == 0;
  return {roi_bad == 0 && seg_bad == 0 && island_in && gap_out,
          fmt::format("102 maps: {} ROI and {} segmentation-alone mismatches; annulus island {}, "
                      "border-gap island {}",
                      roi_bad, seg_bad, island_in ? "enclosed" : "missed",
                      gap_out ? "excluded" : "kept")};
}

// ---------------------------------------------------------------------------

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    files[fs::relative(e.path(), root).string()] = ss.str();
  }
  return files;
}

Outcome determinism(const fs::path& work) {
  const fs::path root = work / "determinism";
  std::vector<std::map<std::string, std::string>> runs;
  for (int run = 0; run < 2; ++run) {
    fs::remove_all(root);
    PipelineConfig cfg = toy_config(root);
    cfg.toy_frames = 16;
    cfg.train.epochs = 2;
    cmd_generate_data(cfg);
    cmd_generate_data(benchmark_config(cfg, 4));
    cmd_train(cfg);
    cmd_infer(cfg);
    runs.push_back(snapshot(root));
  }
  std::vector<std::string> differing;
  for (const auto& [name, bytes] : runs[0]) {
    const auto it = runs[1].find(name);
    if (it == runs[1].end() || it->second != bytes) differing.push_back(name);
  }
  for (const auto& [name, bytes] : runs[1]) {
    if (!runs[0].count(name)) differing.push_back(name);
  }
  return {differing.empty() && !runs[0].empty(),
          fmt::format("{} files from generate-data, train and infer; {} differ{}", runs[0].size(),
                      differing.size(),
                      differing.empty() ? "" : fmt::format(" (first: {})", differing.front()))};
}

}  // namespace
}  // namespace roaderaser

int main(int argc, char** argv) {
  using namespace roaderaser;
  const std::string which = argc > 1 ? argv[1] : "all";
  const fs::path work = argc > 2 ? fs::path(argv[2]) : fs::temp_directory_path() / "roaderaser_acceptance";
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"fusion oracle equivalence", fusion_oracle},
      {"window coverage", window_coverage},
      {"metric oracle equivalence", metric_oracle},
      {"unreachable TPR", unreachable_tpr},
      {"weighted BCE gradient check", bce_gradient},
      {"architecture contracts", architecture},
      {"toy end-to-end", [&] { return toy_end_to_end(work); }},
      {"enclosure semantics", enclosure},
      {"determinism", [&] { return determinism(work); }},
  };
  bool all_pass = true;
  bool ran = false;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (which != "all" && which != std::to_string(i + 1)) continue;
    ran = true;
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {false, fmt::format("exception: {}", e.what())};
    }
    all_pass = all_pass && out.pass;
    fmt::print("criterion {} ({}): {} - {}\n", i + 1, criteria[i].first,
               out.pass ? "PASS" : "FAIL", out.detail);
    std::fflush(stdout);
  }
  if (!ran) {
    fmt::print(stderr, "unknown criterion '{}'\n", which);
    return 2;
  }
  return all_pass ? 0 : 1;
}
