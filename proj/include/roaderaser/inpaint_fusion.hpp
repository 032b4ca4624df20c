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

// Sliding-window inpainting of the drivable area and distance-weighted
// fusion of the overlapping window results.

#ifndef ROADERASER_INPAINT_FUSION_HPP_
#define ROADERASER_INPAINT_FUSION_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "roaderaser/image.hpp"

namespace roaderaser {

inline constexpr int kDefaultPatchSide = 200;
inline constexpr double kDefaultOverlap = 0.7;

// One sliding-window placement. `inpaint_box` has nominal side `patch_side`
// (smaller only when the image itself is smaller); `context_box` has side
// 2 * patch_side, is concentric with the inpaint box and clamped to the image.
struct PatchWindow {
  Pixel center;
  Box inpaint_box;
  Box context_box;
  int patch_side = kDefaultPatchSide;

  friend bool operator==(const PatchWindow&, const PatchWindow&) = default;
};

struct InpaintResult {
  PatchWindow window;
  RgbImage pixels;  // covers window.inpaint_box exactly
};

// Grid stride for a patch side and relative overlap, rounded to whole pixels.
int window_stride(int patch_side, double overlap);

// Row-major sliding-window grid over the image, with the last row/column
// clamped to the image edge. Windows whose inpaint box misses the ROI are
// dropped. An empty ROI yields no windows.
std::vector<PatchWindow> plan_windows(const Mask& roi,
                                      int patch_side = kDefaultPatchSide,
                                      double overlap = kDefaultOverlap);

// Unnormalized fusion weight 1 - (2/s) * max(|u - u_j|, |v - v_j|), clamped
// at zero; zero for pixels outside the window's inpaint box.
double fusion_weight(Pixel pixel, const PatchWindow& window);

// Accumulates weighted window contributions. Results must be added in the
// same order to get bit-identical output; fuse() sorts them first.
class FusionAccumulator {
 public:
  FusionAccumulator(int width, int height);

  void add(const InpaintResult& result);

  int width() const { return width_; }
  int height() const { return height_; }
  std::span<const double> weight_sum() const { return weight_sum_; }
  std::span<const std::uint32_t> coverage() const { return coverage_; }

  // Normalized output. Covered pixels with zero total weight use the
  // unweighted mean of their contributors; uncovered pixels copy `fallback`.
  RgbImage finalize(const RgbImage& fallback) const;

 private:
  int width_;
  int height_;
  std::vector<double> weighted_sum_;    // H x W x 3
  std::vector<double> weight_sum_;      // H x W
  std::vector<double> unweighted_sum_;  // H x W x 3
  std::vector<std::uint32_t> coverage_;  // H x W
};

struct FusedImage {
  RgbImage image;
  Raster<std::uint32_t> coverage;
};

// Fuses window inpaintings; the input order does not affect the result.
FusedImage fuse(std::span<const InpaintResult> results, const RgbImage& fallback);

// Pluggable single-call inpainter: receives the context fragment and a hole
// mask of the same size, returns the filled fragment (same size).
class Inpainter {
 public:
  virtual ~Inpainter() = default;
  virtual RgbImage inpaint(const RgbImage& context, const Mask& hole) const = 0;
};

struct DiffusionOptions {
  double tolerance = 1e-4;  // stop when the largest per-sweep update is below
  int max_iterations = 2000;
  bool multiscale_init = true;  // seed the hole from a coarser solve
  friend bool operator==(const DiffusionOptions&, const DiffusionOptions&) = default;
};

// Harmonic fill: repeated 4-neighbour averaging inside the hole with the
// visible pixels held fixed. A hole touching every fragment border is
// filled with the mean of the visible pixels (or of the whole fragment).
RgbImage baseline_inpaint(const RgbImage& context, const Mask& hole,
                          const DiffusionOptions& options = {});

class DiffusionInpainter final : public Inpainter {
 public:
  explicit DiffusionInpainter(DiffusionOptions options = {}) : options_(options) {}
  RgbImage inpaint(const RgbImage& context, const Mask& hole) const override {
    return baseline_inpaint(context, hole, options_);
  }

 private:
  DiffusionOptions options_;
};

// Adapter for an out-of-process inpainter. The command template may use
// {image}, {mask} and {output}; the image and mask are written as PNG files
// and the command must write the filled fragment to {output}.
class ExternalInpainter final : public Inpainter {
 public:
  ExternalInpainter(std::string command_template, std::string work_dir);
  RgbImage inpaint(const RgbImage& context, const Mask& hole) const override;

 private:
  std::string command_template_;
  std::string work_dir_;
};

class InpaintError : public std::runtime_error {
 public:
  InpaintError(std::size_t window_index, const PatchWindow& window,
               const std::string& what);
  std::size_t window_index() const { return window_index_; }
  const PatchWindow& window() const { return window_; }

 private:
  std::size_t window_index_;
  PatchWindow window_;
};

struct InpaintOptions {
  int patch_side = kDefaultPatchSide;
  double overlap = kDefaultOverlap;
  int jobs = 1;
};

// Hole for one window: inpaint_box intersected with the ROI, expressed in
// context-box coordinates.
Mask window_hole(const Mask& roi, const PatchWindow& window);

// Erases the ROI window by window and fuses the results. Pixels outside the
// ROI are returned unchanged.
RgbImage inpaint_roi(const RgbImage& image, const Mask& roi,
                     const Inpainter& inpainter, const InpaintOptions& options = {});

}  // namespace roaderaser

#endif  // ROADERASER_INPAINT_FUSION_HPP_
