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

#include <algorithm>
#include <map>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "roaderaser/synthetic_obstacles.hpp"

namespace roaderaser {
namespace {

using PixelGroup = std::vector<Pixel>;

// 4-connected components of pixels whose class is in `classes`; a component
// never mixes two classes.
std::vector<std::pair<int, PixelGroup>> class_components(const LabelMap& semantic,
                                                         const std::set<int>& classes) {
  std::vector<std::pair<int, PixelGroup>> out;
  if (classes.empty()) return out;
  const int w = semantic.width(), h = semantic.height();
  Mask visited = make_mask(w, h);
  std::vector<Pixel> stack;
  for (int sy = 0; sy < h; ++sy) {
    for (int sx = 0; sx < w; ++sx) {
      const int cls = semantic.at(sx, sy);
      if (visited.at(sx, sy) || !classes.contains(cls)) continue;
      PixelGroup group;
      visited.at(sx, sy) = 1;
      stack.push_back({sx, sy});
      while (!stack.empty()) {
        const Pixel p = stack.back();
        stack.pop_back();
        group.push_back(p);
        const Pixel next[4] = {{p.x + 1, p.y}, {p.x - 1, p.y}, {p.x, p.y + 1}, {p.x, p.y - 1}};
        for (const Pixel& q : next) {
          if (q.x < 0 || q.y < 0 || q.x >= w || q.y >= h) continue;
          if (visited.at(q.x, q.y) || semantic.at(q.x, q.y) != cls) continue;
          visited.at(q.x, q.y) = 1;
          stack.push_back(q);
        }
      }
      out.emplace_back(cls, std::move(group));
    }
  }
  return out;
}

void emit(int cls, const PixelGroup& group, const RgbImage& image,
          const CutoutFilter& filter, ExtractionResult& result) {
  int x0 = image.width(), y0 = image.height(), x1 = -1, y1 = -1;
  for (const Pixel& p : group) {
    x0 = std::min(x0, p.x);
    y0 = std::min(y0, p.y);
    x1 = std::max(x1, p.x);
    y1 = std::max(y1, p.y);
  }
  const int bw = x1 - x0 + 1, bh = y1 - y0 + 1;
  const int area = static_cast<int>(group.size());
  if (!filter.extent_ok(bw, bh)) {
    ++result.report.rejected_extent;
    return;
  }
  if (!filter.area_ok(area)) {
    ++result.report.rejected_area;
    return;
  }
  ObjectCutout c;
  c.rgb = image.crop({x0, y0, bw, bh});
  c.alpha = make_mask(bw, bh);
  for (const Pixel& p : group) c.alpha.at(p.x - x0, p.y - y0) = 1;
  c.source_class = cls;
  c.width = bw;
  c.height = bh;
  c.area = area;
  result.cutouts.push_back(std::move(c));
  ++result.report.accepted;
}

}  // namespace

ExtractionResult extract_cutouts(const LabelMap& semantic, const LabelMap* instances,
                                 const RgbImage& image, const ExtractionConfig& config) {
  if (!semantic.same_shape(image) || (instances && !instances->same_shape(image))) {
    throw std::invalid_argument("extract_cutouts: label and image dimensions differ");
  }
  ExtractionResult result;
  std::set<int> component_classes(config.component_class_ids.begin(),
                                  config.component_class_ids.end());
  const std::set<int> instance_classes(config.instance_class_ids.begin(),
                                       config.instance_class_ids.end());

  if (!instance_classes.empty() && instances == nullptr) {
    const std::string msg =
        "no instance map; instance-labeled classes fall back to connected components";
    spdlog::warn("extract_cutouts: {}", msg);
    result.report.warnings.push_back(msg);
    component_classes.insert(instance_classes.begin(), instance_classes.end());
  } else if (!instance_classes.empty()) {
    std::map<std::uint16_t, std::pair<int, PixelGroup>> groups;
    for (int y = 0; y < semantic.height(); ++y) {
      for (int x = 0; x < semantic.width(); ++x) {
        const int cls = semantic.at(x, y);
        const std::uint16_t id = instances->at(x, y);
        if (id == 0 || !instance_classes.contains(cls)) continue;
        auto& g = groups[id];
        if (g.second.empty()) g.first = cls;
        g.second.push_back({x, y});
      }
    }
    for (const auto& [id, g] : groups) emit(g.first, g.second, image, config.filter, result);
  }

  for (const auto& [cls, group] : class_components(semantic, component_classes)) {
    emit(cls, group, image, config.filter, result);
  }
  return result;
}

PlacementSampler::PlacementSampler(const Mask& roi) : roi_(roi) {
  for (int y = 0; y < roi.height(); ++y) {
    for (int x = 0; x < roi.width(); ++x) {
      if (roi.at(x, y)) roi_pixels_.push_back({x, y});
    }
  }
}

bool PlacementSampler::fits(const Mask& alpha, Pixel tl) const {
  if (tl.x < 0 || tl.y < 0 || tl.x + alpha.width() > roi_.width() ||
      tl.y + alpha.height() > roi_.height()) {
    return false;
  }
  for (int y = 0; y < alpha.height(); ++y) {
    for (int x = 0; x < alpha.width(); ++x) {
      if (alpha.at(x, y) && !roi_.at(tl.x + x, tl.y + y)) return false;
    }
  }
  return true;
}

std::optional<Pixel> PlacementSampler::sample(const Mask& alpha, Rng& rng,
                                              int max_attempts) const {
  if (roi_pixels_.empty()) return std::nullopt;
  // The first alpha pixel in row-major order is the anchor: each valid
  // top-left corresponds to exactly one ROI anchor pixel.
  Pixel anchor{-1, -1};
  for (int y = 0; y < alpha.height() && anchor.x < 0; ++y) {
    for (int x = 0; x < alpha.width(); ++x) {
      if (alpha.at(x, y)) {
        anchor = {x, y};
        break;
      }
    }
  }
  if (anchor.x < 0) return std::nullopt;
  std::uniform_int_distribution<std::size_t> pick(0, roi_pixels_.size() - 1);
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    const Pixel q = roi_pixels_[pick(rng)];
    const Pixel tl{q.x - anchor.x, q.y - anchor.y};
    if (fits(alpha, tl)) return tl;
  }
  return std::nullopt;
}

namespace {

ObjectCutout mirrored(const ObjectCutout& c) {
  ObjectCutout m = c;
  for (int y = 0; y < c.height; ++y) {
    for (int x = 0; x < c.width; ++x) {
      const int sx = c.width - 1 - x;
      m.alpha.at(x, y) = c.alpha.at(sx, y);
      for (int ch = 0; ch < 3; ++ch) m.rgb.at(x, y, ch) = c.rgb.at(sx, y, ch);
    }
  }
  return m;
}

}  // namespace

PasteResult paste_obstacles(const RgbImage& image, const Mask& roi,
                            std::span<const ObjectCutout> cutouts, Rng& rng,
                            const PasteConfig& config) {
  if (!image.same_shape(roi)) {
    throw std::invalid_argument("paste_obstacles: image and ROI dimensions differ");
  }
  if (config.min_count < 0 || config.max_count < config.min_count) {
    throw std::invalid_argument("paste_obstacles: invalid obstacle count range");
  }
  PasteResult result{image, make_mask(image.width(), image.height()), 0, 0, false};
  if (cutouts.empty()) {
    result.flagged = config.max_count > 0;
    return result;
  }
  const PlacementSampler sampler(roi);
  result.requested =
      std::uniform_int_distribution<int>(config.min_count, config.max_count)(rng);
  std::uniform_int_distribution<std::size_t> pick(0, cutouts.size() - 1);
  std::bernoulli_distribution mirror(config.mirror_probability);
  for (int k = 0; k < result.requested; ++k) {
    const ObjectCutout& base = cutouts[pick(rng)];
    const ObjectCutout c = mirror(rng) ? mirrored(base) : base;
    const auto tl = sampler.sample(c.alpha, rng, config.max_attempts);
    if (!tl) {
      result.flagged = true;
      continue;
    }
    for (int y = 0; y < c.height; ++y) {
      for (int x = 0; x < c.width; ++x) {
        if (!c.alpha.at(x, y)) continue;
        for (int ch = 0; ch < 3; ++ch) {
          result.image.at(tl->x + x, tl->y + y, ch) = c.rgb.at(x, y, ch);
        }
        result.obstacle_mask.at(tl->x + x, tl->y + y) = 1;
      }
    }
    ++result.placed;
  }
  return result;
}

}  // namespace roaderaser
