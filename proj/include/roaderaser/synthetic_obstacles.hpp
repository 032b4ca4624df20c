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

// Semi-synthetic training data: object cutouts pasted onto the drivable
// area, high-frequency augmentation, and the fixed crop schedule.

#ifndef ROADERASER_SYNTHETIC_OBSTACLES_HPP_
#define ROADERASER_SYNTHETIC_OBSTACLES_HPP_

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "roaderaser/drivable_area.hpp"
#include "roaderaser/image.hpp"

namespace roaderaser {

using Rng = std::mt19937_64;

// Mixes a base seed with stream indices into an independent 64-bit seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

struct ObjectCutout {
  RgbImage rgb;
  Mask alpha;  // 0/1, same size as rgb
  int source_class = 0;
  int width = 0;   // bounding-box extent
  int height = 0;
  int area = 0;    // alpha pixel count
};

struct CutoutFilter {
  int min_extent = 10;
  int max_extent = 150;
  int min_area = 100;
  int max_area = 5000;

  bool extent_ok(int width, int height) const {
    const int e = std::max(width, height);
    return e >= min_extent && e <= max_extent;
  }
  bool area_ok(int area) const { return area >= min_area && area <= max_area; }
  friend bool operator==(const CutoutFilter&, const CutoutFilter&) = default;
};

struct ExtractionConfig {
  std::vector<int> instance_class_ids;   // one cutout per instance id
  std::vector<int> component_class_ids;  // one cutout per connected component
  CutoutFilter filter;
};

struct ExtractionReport {
  std::size_t accepted = 0;
  std::size_t rejected_extent = 0;
  std::size_t rejected_area = 0;
  std::vector<std::string> warnings;
};

struct ExtractionResult {
  std::vector<ObjectCutout> cutouts;
  ExtractionReport report;
};

// `instances` may be null; instance-labeled classes then fall back to
// connected components and a warning is recorded.
ExtractionResult extract_cutouts(const LabelMap& semantic, const LabelMap* instances,
                                 const RgbImage& image, const ExtractionConfig& config);

struct PasteConfig {
  int min_count = 1;
  int max_count = 6;
  int max_attempts = 100;  // rejection-sampling attempts per obstacle
  double mirror_probability = 0.5;
  friend bool operator==(const PasteConfig&, const PasteConfig&) = default;
};

struct PasteResult {
  RgbImage image;
  Mask obstacle_mask;  // 0/1
  int requested = 0;
  int placed = 0;
  bool flagged = false;  // some obstacle could not be placed
};

// Draws top-left positions uniformly over the placements where every alpha
// pixel lands inside the ROI, by rejection from uniformly drawn ROI anchors.
class PlacementSampler {
 public:
  explicit PlacementSampler(const Mask& roi);
  std::optional<Pixel> sample(const Mask& alpha, Rng& rng, int max_attempts) const;
  bool fits(const Mask& alpha, Pixel top_left) const;

 private:
  const Mask& roi_;
  std::vector<Pixel> roi_pixels_;
};

PasteResult paste_obstacles(const RgbImage& image, const Mask& roi,
                            std::span<const ObjectCutout> cutouts, Rng& rng,
                            const PasteConfig& config = {});

struct NoiseScale {
  double amplitude = 0.0;  // standard deviation of the additive noise
  int cell_size = 1;       // 1 = per pixel; larger cells are bilinearly upsampled
  friend bool operator==(const NoiseScale&, const NoiseScale&) = default;
};

struct AugmentConfig {
  bool blur = true;
  double blur_sigma = 1.0;
  bool noise = true;
  NoiseScale fine{0.04, 1};
  NoiseScale coarse{0.08, 16};
  friend bool operator==(const AugmentConfig&, const AugmentConfig&) = default;
};

// Separable Gaussian blur with reflected borders; sigma 0 is the identity.
RgbImage gaussian_blur(const RgbImage& image, double sigma);

// Blur, then zero-mean luminance noise at a fine and a coarse scale, clamped
// to [0, 1].
RgbImage augment_high_freq(const RgbImage& image, Rng& rng, const AugmentConfig& config);

struct CropSize {
  int width = 768;
  int height = 384;
  friend bool operator==(const CropSize&, const CropSize&) = default;
};

struct FrameExtent {
  std::string id;
  int width = 0;
  int height = 0;
  Box roi_bounds;  // crops are centred inside this box when possible
};

struct ScheduleEntry {
  std::string frame_id;
  Pixel crop_origin;
  std::uint64_t sample_seed = 0;
  bool padded = false;  // frame smaller than the crop; reflect-padded
};

struct EpochPlan {
  CropSize crop;
  std::uint64_t seed = 0;
  std::vector<std::vector<ScheduleEntry>> epochs;
  std::vector<std::string> padded_frames;

  std::size_t entry_count() const;
  nlohmann::json to_json() const;
  static EpochPlan from_json(const nlohmann::json& j);
};

EpochPlan build_epoch_plan(std::span<const FrameExtent> frames, CropSize crop, int epochs,
                           std::uint64_t seed);

// Crop that reflects out-of-range coordinates back into the raster.
template <typename T>
Raster<T> crop_reflect(const Raster<T>& src, Pixel origin, int width, int height) {
  const auto reflect = [](int v, int n) {
    if (n == 1) return 0;
    const int period = 2 * (n - 1);
    v %= period;
    if (v < 0) v += period;
    return v < n ? v : period - v;
  };
  Raster<T> out(width, height, src.channels());
  for (int y = 0; y < height; ++y) {
    const int sy = reflect(origin.y + y, src.height());
    for (int x = 0; x < width; ++x) {
      const int sx = reflect(origin.x + x, src.width());
      for (int c = 0; c < src.channels(); ++c) out.at(x, y, c) = src.at(sx, sy, c);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Procedural toy roads for desk-scale runs.

struct ToyRoadConfig {
  int width = 256;
  int height = 128;
};

enum class ToyContent {
  kClean,           // road scene only
  kOffRoadObjects,  // people, cars, signs and lights beside the road
  kRoadObstacles,   // unusual geometric obstacles lying on the road
};

struct ToyFrame {
  RgbImage image;
  LabelMap semantic;
  LabelMap instances;  // 0 = no instance
  Mask labels;         // 0 road, 1 obstacle, 255 outside the drivable area
  Mask roi;            // 0/1 drivable area
};

namespace toy_class {
inline constexpr int kSky = 0;
inline constexpr int kBuilding = 1;
inline constexpr int kVegetation = 2;
inline constexpr int kRoad = 3;
inline constexpr int kSidewalk = 4;
inline constexpr int kPerson = 5;
inline constexpr int kCar = 6;
inline constexpr int kTrafficSign = 7;
inline constexpr int kTrafficLight = 8;
inline constexpr int kObstacle = 9;
}  // namespace toy_class

ClassVocabulary toy_vocabulary();
ToyFrame generate_toy_frame(const ToyRoadConfig& config, std::uint64_t seed,
                            ToyContent content);

}  // namespace roaderaser

#endif  // ROADERASER_SYNTHETIC_OBSTACLES_HPP_
