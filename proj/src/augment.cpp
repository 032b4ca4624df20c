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

#include "roaderaser/synthetic_obstacles.hpp"

namespace roaderaser {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

int reflect_index(int v, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  v %= period;
  if (v < 0) v += period;
  return v < n ? v : period - v;
}

// Noise field of the given scale, one value per pixel.
std::vector<float> noise_field(int w, int h, const NoiseScale& scale, Rng& rng) {
  std::vector<float> field(static_cast<std::size_t>(w) * h, 0.0f);
  std::normal_distribution<float> normal(0.0f, static_cast<float>(scale.amplitude));
  const int cell = std::max(1, scale.cell_size);
  if (cell == 1) {
    for (float& v : field) v = normal(rng);
    return field;
  }
  const int gw = w / cell + 2, gh = h / cell + 2;
  std::vector<float> grid(static_cast<std::size_t>(gw) * gh);
  for (float& v : grid) v = normal(rng);
  for (int y = 0; y < h; ++y) {
    const float fy = static_cast<float>(y) / cell;
    const int y0 = static_cast<int>(fy);
    const float ty = fy - y0;
    for (int x = 0; x < w; ++x) {
      const float fx = static_cast<float>(x) / cell;
      const int x0 = static_cast<int>(fx);
      const float tx = fx - x0;
      const auto g = [&](int gx, int gy) { return grid[static_cast<std::size_t>(gy) * gw + gx]; };
      const float top = g(x0, y0) * (1 - tx) + g(x0 + 1, y0) * tx;
      const float bottom = g(x0, y0 + 1) * (1 - tx) + g(x0 + 1, y0 + 1) * tx;
      field[static_cast<std::size_t>(y) * w + x] = top * (1 - ty) + bottom * ty;
    }
  }
  return field;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(splitmix64(base) ^ a) ^ (b * 0xD1B54A32D192ED03ULL));
}

RgbImage gaussian_blur(const RgbImage& image, double sigma) {
  if (sigma < 0) throw std::invalid_argument("gaussian_blur: sigma must be >= 0");
  if (sigma == 0 || image.empty()) return image;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  double total = 0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    total += kernel[i + radius];
  }
  for (double& k : kernel) k /= total;

  const int w = image.width(), h = image.height(), ch = image.channels();
  RgbImage tmp(w, h, ch);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < ch; ++c) {
        double acc = 0;
        for (int i = -radius; i <= radius; ++i) {
          acc += kernel[i + radius] * image.at(reflect_index(x + i, w), y, c);
        }
        tmp.at(x, y, c) = static_cast<float>(acc);
      }
    }
  }
  RgbImage out(w, h, ch);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < ch; ++c) {
        double acc = 0;
        for (int i = -radius; i <= radius; ++i) {
          acc += kernel[i + radius] * tmp.at(x, reflect_index(y + i, h), c);
        }
        out.at(x, y, c) = static_cast<float>(acc);
      }
    }
  }
  return out;
}

RgbImage augment_high_freq(const RgbImage& image, Rng& rng, const AugmentConfig& config) {
  RgbImage out = config.blur ? gaussian_blur(image, config.blur_sigma) : image;
  if (!config.noise) return out;
  const int w = out.width(), h = out.height();
  std::vector<float> total(static_cast<std::size_t>(w) * h, 0.0f);
  bool any = false;
  for (const NoiseScale& s : {config.fine, config.coarse}) {
    if (s.amplitude <= 0) continue;
    const auto field = noise_field(w, h, s, rng);
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += field[i];
    any = true;
  }
  if (!any) return out;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const float n = total[static_cast<std::size_t>(y) * w + x];
      for (int c = 0; c < out.channels(); ++c) {
        out.at(x, y, c) = std::clamp(out.at(x, y, c) + n, 0.0f, 1.0f);
      }
    }
  }
  return out;
}

std::size_t EpochPlan::entry_count() const {
  std::size_t n = 0;
  for (const auto& e : epochs) n += e.size();
  return n;
}

nlohmann::json EpochPlan::to_json() const {
  nlohmann::json j;
  j["crop"] = {{"width", crop.width}, {"height", crop.height}};
  j["seed"] = seed;
  j["padded_frames"] = padded_frames;
  j["epochs"] = nlohmann::json::array();
  for (const auto& epoch : epochs) {
    auto arr = nlohmann::json::array();
    for (const auto& e : epoch) {
      arr.push_back({{"frame", e.frame_id},
                     {"x", e.crop_origin.x},
                     {"y", e.crop_origin.y},
                     {"seed", e.sample_seed},
                     {"padded", e.padded}});
    }
    j["epochs"].push_back(std::move(arr));
  }
  return j;
}

EpochPlan EpochPlan::from_json(const nlohmann::json& j) {
  EpochPlan p;
  p.crop = {j.at("crop").at("width").get<int>(), j.at("crop").at("height").get<int>()};
  p.seed = j.at("seed").get<std::uint64_t>();
  p.padded_frames = j.at("padded_frames").get<std::vector<std::string>>();
  for (const auto& epoch : j.at("epochs")) {
    std::vector<ScheduleEntry> entries;
    for (const auto& e : epoch) {
      entries.push_back({e.at("frame").get<std::string>(),
                         {e.at("x").get<int>(), e.at("y").get<int>()},
                         e.at("seed").get<std::uint64_t>(),
                         e.at("padded").get<bool>()});
    }
    p.epochs.push_back(std::move(entries));
  }
  return p;
}

EpochPlan build_epoch_plan(std::span<const FrameExtent> frames, CropSize crop, int epochs,
                           std::uint64_t seed) {
  if (crop.width <= 0 || crop.height <= 0 || epochs < 0) {
    throw std::invalid_argument("build_epoch_plan: invalid crop size or epoch count");
  }
  EpochPlan plan;
  plan.crop = crop;
  plan.seed = seed;
  for (const auto& f : frames) {
    if (f.width < crop.width || f.height < crop.height) plan.padded_frames.push_back(f.id);
  }
  std::vector<std::size_t> order(frames.size());
  for (int e = 0; e < epochs; ++e) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(e), 1));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<ScheduleEntry> entries;
    entries.reserve(order.size());
    for (std::size_t i : order) {
      const FrameExtent& f = frames[i];
      ScheduleEntry entry;
      entry.frame_id = f.id;
      entry.padded = f.width < crop.width || f.height < crop.height;
      const Box region = f.roi_bounds.empty() ? Box{0, 0, f.width, f.height} : f.roi_bounds;
      // Centre drawn inside the ROI bounds, origin clamped into the frame.
      const int cx = std::uniform_int_distribution<int>(region.x0, region.x1() - 1)(rng);
      const int cy = std::uniform_int_distribution<int>(region.y0, region.y1() - 1)(rng);
      entry.crop_origin.x = std::clamp(cx - crop.width / 2, 0, std::max(0, f.width - crop.width));
      entry.crop_origin.y =
          std::clamp(cy - crop.height / 2, 0, std::max(0, f.height - crop.height));
      entry.sample_seed = rng();
      entries.push_back(std::move(entry));
    }
    plan.epochs.push_back(std::move(entries));
  }
  return plan;
}

}  // namespace roaderaser
