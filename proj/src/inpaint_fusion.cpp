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

#include "roaderaser/inpaint_fusion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include <fmt/format.h>

#include "roaderaser/parallel.hpp"

namespace roaderaser {
namespace {

// Window origins along one axis: regular stride, last one flush with the edge.
std::vector<int> axis_origins(int length, int side, int stride) {
  if (side >= length) return {0};
  std::vector<int> origins;
  for (int p = 0; p + side <= length; p += stride) origins.push_back(p);
  if (origins.back() + side < length) origins.push_back(length - side);
  return origins;
}

// Summed-area table of nonzero mask pixels, (W+1) x (H+1).
class MaskIntegral {
 public:
  explicit MaskIntegral(const Mask& m)
      : stride_(m.width() + 1),
        table_(static_cast<std::size_t>(m.width() + 1) * (m.height() + 1), 0) {
    for (int y = 0; y < m.height(); ++y) {
      long long row = 0;
      for (int x = 0; x < m.width(); ++x) {
        row += m.at(x, y) ? 1 : 0;
        table_[idx(x + 1, y + 1)] = table_[idx(x + 1, y)] + row;
      }
    }
  }
  long long count(const Box& b) const {
    return table_[idx(b.x1(), b.y1())] - table_[idx(b.x0, b.y1())] -
           table_[idx(b.x1(), b.y0)] + table_[idx(b.x0, b.y0)];
  }

 private:
  std::size_t idx(int x, int y) const {
    return static_cast<std::size_t>(y) * stride_ + x;
  }
  int stride_;
  std::vector<long long> table_;
};

bool window_less(const InpaintResult& a, const InpaintResult& b) {
  const auto key = [](const PatchWindow& w) {
    return std::tuple(w.inpaint_box.y0, w.inpaint_box.x0, w.inpaint_box.height,
                      w.inpaint_box.width, w.patch_side, w.center.y, w.center.x);
  };
  const auto ka = key(a.window), kb = key(b.window);
  if (ka != kb) return ka < kb;
  // Identical placements: order by content so the sort is total.
  return std::lexicographical_compare(a.pixels.data().begin(), a.pixels.data().end(),
                                      b.pixels.data().begin(), b.pixels.data().end());
}

}  // namespace

int window_stride(int patch_side, double overlap) {
  return std::max(1, static_cast<int>(std::lround(patch_side * (1.0 - overlap))));
}

std::vector<PatchWindow> plan_windows(const Mask& roi, int patch_side, double overlap) {
  if (patch_side < 2) {
    throw std::invalid_argument("plan_windows: patch_side must be >= 2");
  }
  if (!(overlap >= 0.0 && overlap < 1.0)) {
    throw std::invalid_argument("plan_windows: overlap must be in [0, 1)");
  }
  std::vector<PatchWindow> windows;
  if (roi.empty()) return windows;

  const int stride = window_stride(patch_side, overlap);
  const MaskIntegral integral(roi);
  if (integral.count(roi.bounds()) == 0) return windows;

  const std::vector<int> xs = axis_origins(roi.width(), patch_side, stride);
  const std::vector<int> ys = axis_origins(roi.height(), patch_side, stride);
  const int box_w = std::min(patch_side, roi.width());
  const int box_h = std::min(patch_side, roi.height());
  const int half = patch_side / 2;
  for (int y0 : ys) {
    for (int x0 : xs) {
      PatchWindow w;
      w.patch_side = patch_side;
      w.inpaint_box = {x0, y0, box_w, box_h};
      if (integral.count(w.inpaint_box) == 0) continue;
      w.center = {x0 + box_w / 2, y0 + box_h / 2};
      w.context_box = Box{x0 - half, y0 - half, 2 * patch_side, 2 * patch_side}
                          .intersect(roi.bounds());
      windows.push_back(w);
    }
  }
  return windows;
}

double fusion_weight(Pixel pixel, const PatchWindow& window) {
  if (!window.inpaint_box.contains(pixel.x, pixel.y)) return 0.0;
  const int d = std::max(std::abs(pixel.x - window.center.x),
                         std::abs(pixel.y - window.center.y));
  return std::max(0.0, 1.0 - (2.0 / window.patch_side) * d);
}

FusionAccumulator::FusionAccumulator(int width, int height)
    : width_(width),
      height_(height),
      weighted_sum_(static_cast<std::size_t>(width) * height * 3, 0.0),
      weight_sum_(static_cast<std::size_t>(width) * height, 0.0),
      unweighted_sum_(static_cast<std::size_t>(width) * height * 3, 0.0),
      coverage_(static_cast<std::size_t>(width) * height, 0) {}

void FusionAccumulator::add(const InpaintResult& r) {
  const Box& box = r.window.inpaint_box;
  if (!Box{0, 0, width_, height_}.contains(box)) {
    throw std::invalid_argument("fuse: inpaint box outside the image");
  }
  if (!r.pixels.same_shape(box.width, box.height) || r.pixels.channels() != 3) {
    throw std::invalid_argument("fuse: fragment does not match its inpaint box");
  }
  for (int y = box.y0; y < box.y1(); ++y) {
    for (int x = box.x0; x < box.x1(); ++x) {
      const double w = fusion_weight({x, y}, r.window);
      const std::size_t p = static_cast<std::size_t>(y) * width_ + x;
      weight_sum_[p] += w;
      ++coverage_[p];
      for (int c = 0; c < 3; ++c) {
        const double v = r.pixels.at(x - box.x0, y - box.y0, c);
        weighted_sum_[p * 3 + c] += w * v;
        unweighted_sum_[p * 3 + c] += v;
      }
    }
  }
}

RgbImage FusionAccumulator::finalize(const RgbImage& fallback) const {
  if (!fallback.same_shape(width_, height_) || fallback.channels() != 3) {
    throw std::invalid_argument("fuse: fallback image has the wrong shape");
  }
  RgbImage out = fallback;
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * width_ + x;
      if (coverage_[p] == 0) continue;
      for (int c = 0; c < 3; ++c) {
        const double v = weight_sum_[p] > 0.0
                             ? weighted_sum_[p * 3 + c] / weight_sum_[p]
                             : unweighted_sum_[p * 3 + c] / coverage_[p];
        out.at(x, y, c) = static_cast<float>(v);
      }
    }
  }
  return out;
}

FusedImage fuse(std::span<const InpaintResult> results, const RgbImage& fallback) {
  std::vector<const InpaintResult*> order;
  order.reserve(results.size());
  for (const auto& r : results) order.push_back(&r);
  std::stable_sort(order.begin(), order.end(),
                   [](const auto* a, const auto* b) { return window_less(*a, *b); });

  FusionAccumulator acc(fallback.width(), fallback.height());
  for (const auto* r : order) acc.add(*r);

  FusedImage out{acc.finalize(fallback),
                 Raster<std::uint32_t>(fallback.width(), fallback.height(), 1)};
  std::copy(acc.coverage().begin(), acc.coverage().end(), out.coverage.data().begin());
  return out;
}

InpaintError::InpaintError(std::size_t window_index, const PatchWindow& window,
                           const std::string& what)
    : std::runtime_error(fmt::format(
          "inpainter failed on window {} (inpaint box x={} y={} w={} h={}): {}",
          window_index, window.inpaint_box.x0, window.inpaint_box.y0,
          window.inpaint_box.width, window.inpaint_box.height, what)),
      window_index_(window_index),
      window_(window) {}

Mask window_hole(const Mask& roi, const PatchWindow& window) {
  const Box& ctx = window.context_box;
  Mask hole = make_mask(ctx.width, ctx.height);
  const Box& box = window.inpaint_box;
  for (int y = box.y0; y < box.y1(); ++y) {
    for (int x = box.x0; x < box.x1(); ++x) {
      if (roi.at(x, y)) hole.at(x - ctx.x0, y - ctx.y0) = 1;
    }
  }
  return hole;
}

RgbImage inpaint_roi(const RgbImage& image, const Mask& roi, const Inpainter& inpainter,
                     const InpaintOptions& options) {
  if (!image.same_shape(roi) || image.channels() != 3) {
    throw std::invalid_argument("inpaint_roi: image and ROI dimensions differ");
  }
  const std::vector<PatchWindow> windows =
      plan_windows(roi, options.patch_side, options.overlap);
  if (windows.empty()) return image;

  std::vector<InpaintResult> results(windows.size());
  parallel_for(windows.size(), options.jobs, [&](std::size_t i) {
    const PatchWindow& w = windows[i];
    RgbImage context = image.crop(w.context_box);
    const Mask hole = window_hole(roi, w);
    // The inpainter never sees the pixels it is asked to fill.
    for (int y = 0; y < hole.height(); ++y) {
      for (int x = 0; x < hole.width(); ++x) {
        if (hole.at(x, y)) {
          for (int c = 0; c < 3; ++c) context.at(x, y, c) = 0.0f;
        }
      }
    }
    RgbImage filled;
    try {
      filled = inpainter.inpaint(context, hole);
    } catch (const std::exception& e) {
      throw InpaintError(i, w, e.what());
    }
    if (!filled.same_shape(context) || filled.channels() != 3) {
      throw InpaintError(i, w, "inpainter returned a fragment of the wrong size");
    }
    const Box local{w.inpaint_box.x0 - w.context_box.x0,
                    w.inpaint_box.y0 - w.context_box.y0, w.inpaint_box.width,
                    w.inpaint_box.height};
    RgbImage pixels = filled.crop(local);
    for (float& v : pixels.data()) v = std::clamp(v, 0.0f, 1.0f);
    results[i] = InpaintResult{w, std::move(pixels)};
  });

  const FusedImage fused = fuse(results, image);
  RgbImage out = image;
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      if (!roi.at(x, y)) continue;
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = fused.image.at(x, y, c);
    }
  }
  return out;
}

}  // namespace roaderaser
