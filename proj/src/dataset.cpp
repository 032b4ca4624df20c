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
#include <cmath>
#include <cstdio>
#include <set>

#include <fmt/format.h>

#include "roaderaser/image_io.hpp"
#include "roaderaser/pipeline.hpp"

namespace roaderaser {

namespace fs = std::filesystem;

namespace {

std::set<std::string> png_ids(const fs::path& dir) {
  std::set<std::string> ids;
  if (!fs::is_directory(dir)) return ids;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") {
      ids.insert(entry.path().stem().string());
    }
  }
  return ids;
}

// Reads only the PNG header.
std::pair<int, int> png_size(const fs::path& path) {
  // IHDR holds big-endian width and height at byte offsets 16 and 20.
  std::FILE* f = std::fopen(path.string().c_str(), "rb");
  unsigned char buf[24] = {};
  const std::size_t got = f ? std::fread(buf, 1, sizeof buf, f) : 0;
  if (f) std::fclose(f);
  if (got != sizeof buf || buf[1] != 'P' || buf[2] != 'N' || buf[3] != 'G') {
    throw std::runtime_error(fmt::format("'{}' is not a PNG file", path.string()));
  }
  const auto be32 = [&](int o) {
    return static_cast<int>((buf[o] << 24) | (buf[o + 1] << 16) | (buf[o + 2] << 8) | buf[o + 3]);
  };
  return {be32(16), be32(20)};
}

}  // namespace

std::vector<std::string> list_png_ids(const fs::path& dir) {
  const auto ids = png_ids(dir);
  return {ids.begin(), ids.end()};
}

std::vector<FrameRecord> list_frames(const fs::path& dir, const std::vector<std::string>& required) {
  static const std::vector<std::string> kKinds = {"labels", "roi", "semantic", "inpainted"};
  for (const auto& r : required) {
    if (std::find(kKinds.begin(), kKinds.end(), r) == kKinds.end()) {
      throw std::invalid_argument(fmt::format("unknown frame component '{}'", r));
    }
  }
  if (!fs::is_directory(dir / "images")) {
    throw ConfigError(fmt::format("dataset '{}' has no images/ directory", dir.string()));
  }
  std::vector<FrameRecord> frames;
  std::vector<std::string> missing;
  std::vector<std::string> mismatched;
  for (const auto& id : png_ids(dir / "images")) {
    FrameRecord rec;
    rec.id = id;
    rec.image = dir / "images" / (id + ".png");
    const auto [w, h] = png_size(rec.image);
    for (const auto& kind : kKinds) {
      const fs::path p = dir / kind / (id + ".png");
      const bool want = std::find(required.begin(), required.end(), kind) != required.end();
      if (!fs::exists(p)) {
        if (want) missing.push_back(p.string());
        continue;
      }
      if (png_size(p) != std::pair{w, h}) mismatched.push_back(p.string());
      if (kind == "labels") rec.labels = p;
      if (kind == "roi") rec.roi = p;
      if (kind == "semantic") rec.semantic = p;
      if (kind == "inpainted") rec.inpainted = p;
    }
    frames.push_back(std::move(rec));
  }
  if (!missing.empty()) {
    throw ConfigError(fmt::format("dataset '{}' is missing {} file(s): {}", dir.string(),
                                  missing.size(), fmt::join(missing, ", ")));
  }
  if (!mismatched.empty()) {
    throw ConfigError(fmt::format("dataset '{}' has rasters whose size differs from the image: {}",
                                  dir.string(), fmt::join(mismatched, ", ")));
  }
  return frames;
}

fs::path train_dir(const PipelineConfig& cfg, Variant v) {
  return fs::path(cfg.output_dir) / "train" / to_string(v);
}
fs::path infer_dir(const PipelineConfig& cfg, Variant v) {
  return fs::path(cfg.output_dir) / "infer" / to_string(v);
}
fs::path eval_dir(const PipelineConfig& cfg, Variant v) {
  return fs::path(cfg.output_dir) / "eval" / to_string(v);
}

RgbImage quantize_u8(const RgbImage& image) {
  RgbImage out = image;
  for (float& v : out.data()) v = io::to_u8(v) / 255.0f;
  return out;
}

Heatmap rgb_l1_score(const RgbImage& a, const RgbImage& b, const Mask& roi) {
  if (!a.same_shape(b) || !a.same_shape(roi)) {
    throw std::invalid_argument("rgb_l1_score: shape mismatch");
  }
  Heatmap out = make_heatmap(a.width(), a.height());
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      if (!roi.at(x, y)) continue;
      float d = 0.0f;
      for (int c = 0; c < 3; ++c) d += std::abs(a.at(x, y, c) - b.at(x, y, c));
      out.at(x, y) = std::clamp(d / 3.0f, 0.0f, 1.0f);
    }
  }
  return out;
}

}  // namespace roaderaser
