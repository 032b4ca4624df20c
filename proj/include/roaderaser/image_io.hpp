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

#ifndef ROADERASER_IMAGE_IO_HPP_
#define ROADERASER_IMAGE_IO_HPP_

#include <filesystem>

#include "roaderaser/image.hpp"

namespace roaderaser::io {

// 8-bit RGB rasters, values mapped to [0, 1].
RgbImage read_rgb(const std::filesystem::path& path);
void write_rgb(const std::filesystem::path& path, const RgbImage& image);

// 8-bit single-channel masks (0/1/255 convention for labels).
Mask read_mask(const std::filesystem::path& path);
void write_mask(const std::filesystem::path& path, const Mask& mask);

// Single-channel 8- or 16-bit class / instance id rasters.
LabelMap read_label_map(const std::filesystem::path& path);
void write_label_map(const std::filesystem::path& path, const LabelMap& map);

// 16-bit grayscale heatmaps, score = value / 65535.
Heatmap read_heatmap(const std::filesystem::path& path);
void write_heatmap(const std::filesystem::path& path, const Heatmap& heatmap);

// Quantizes a [0,1] value the way write_rgb does.
inline std::uint8_t to_u8(float v) {
  const float c = std::clamp(v, 0.0f, 1.0f);
  return static_cast<std::uint8_t>(c * 255.0f + 0.5f);
}
inline std::uint16_t to_u16(float v) {
  const float c = std::clamp(v, 0.0f, 1.0f);
  return static_cast<std::uint16_t>(c * 65535.0f + 0.5f);
}

}  // namespace roaderaser::io

#endif  // ROADERASER_IMAGE_IO_HPP_
