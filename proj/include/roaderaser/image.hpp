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

#ifndef ROADERASER_IMAGE_HPP_
#define ROADERASER_IMAGE_HPP_

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace roaderaser {

struct Pixel {
  int x = 0;
  int y = 0;
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

// Half-open axis-aligned rectangle [x0, x0 + width) x [y0, y0 + height).
struct Box {
  int x0 = 0;
  int y0 = 0;
  int width = 0;
  int height = 0;

  int x1() const { return x0 + width; }
  int y1() const { return y0 + height; }
  bool empty() const { return width <= 0 || height <= 0; }
  long long area() const { return empty() ? 0 : 1LL * width * height; }
  bool contains(int x, int y) const {
    return x >= x0 && x < x1() && y >= y0 && y < y1();
  }
  bool contains(const Box& o) const {
    return o.x0 >= x0 && o.y0 >= y0 && o.x1() <= x1() && o.y1() <= y1();
  }
  Box intersect(const Box& o) const {
    const int nx0 = std::max(x0, o.x0), ny0 = std::max(y0, o.y0);
    const int nx1 = std::min(x1(), o.x1()), ny1 = std::min(y1(), o.y1());
    return {nx0, ny0, std::max(0, nx1 - nx0), std::max(0, ny1 - ny0)};
  }
  friend bool operator==(const Box&, const Box&) = default;
};

// Dense interleaved raster, row-major, channels innermost.
template <typename T>
class Raster {
 public:
  using value_type = T;

  Raster() = default;
  Raster(int width, int height, int channels, T fill = T{})
      : width_(width), height_(height), channels_(channels) {
    if (width < 0 || height < 0 || channels <= 0) {
      throw std::invalid_argument("Raster: invalid dimensions");
    }
    data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width_) * height_;
  }
  bool empty() const { return data_.empty(); }
  Box bounds() const { return {0, 0, width_, height_}; }
  bool same_shape(int w, int h) const { return w == width_ && h == height_; }
  template <typename U>
  bool same_shape(const Raster<U>& o) const {
    return o.width() == width_ && o.height() == height_;
  }

  T& at(int x, int y, int c = 0) {
    assert(x >= 0 && x < width_ && y >= 0 && y < height_);
    return data_[index(x, y, c)];
  }
  const T& at(int x, int y, int c = 0) const {
    assert(x >= 0 && x < width_ && y >= 0 && y < height_);
    return data_[index(x, y, c)];
  }
  std::size_t index(int x, int y, int c = 0) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  // Copies `region` (clamped to bounds by the caller) into a new raster.
  Raster crop(const Box& region) const {
    if (!bounds().contains(region)) {
      throw std::out_of_range("Raster::crop: region outside raster");
    }
    Raster out(region.width, region.height, channels_);
    for (int y = 0; y < region.height; ++y) {
      const T* src = &data_[index(region.x0, region.y0 + y)];
      std::copy(src, src + static_cast<std::size_t>(region.width) * channels_,
                &out.data_[out.index(0, y)]);
    }
    return out;
  }

  // Writes `patch` at (x0, y0); the patch must fit.
  void paste(const Raster& patch, int x0, int y0) {
    if (patch.channels_ != channels_ ||
        !bounds().contains(Box{x0, y0, patch.width_, patch.height_})) {
      throw std::out_of_range("Raster::paste: patch does not fit");
    }
    for (int y = 0; y < patch.height_; ++y) {
      const T* src = &patch.data_[patch.index(0, y)];
      std::copy(src, src + static_cast<std::size_t>(patch.width_) * channels_,
                &data_[index(x0, y0 + y)]);
    }
  }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 1;
  std::vector<T> data_;
};

// H x W x 3, values in [0, 1].
using RgbImage = Raster<float>;
// Binary or label mask (0/1, or 0/1/255 for obstacle labels).
using Mask = Raster<std::uint8_t>;
// Per-pixel obstacle score in [0, 1].
using Heatmap = Raster<float>;
// Class-id or instance-id raster.
using LabelMap = Raster<std::uint16_t>;

inline constexpr std::uint8_t kIgnoreLabel = 255;

inline RgbImage make_rgb(int width, int height, float fill = 0.0f) {
  return RgbImage(width, height, 3, fill);
}
inline Mask make_mask(int width, int height, std::uint8_t fill = 0) {
  return Mask(width, height, 1, fill);
}
inline Heatmap make_heatmap(int width, int height, float fill = 0.0f) {
  return Heatmap(width, height, 1, fill);
}

inline std::size_t count_nonzero(const Mask& m) {
  return static_cast<std::size_t>(
      std::count_if(m.data().begin(), m.data().end(),
                    [](std::uint8_t v) { return v != 0; }));
}

// Tight bounding box of nonzero pixels; empty box if none.
inline Box nonzero_bounds(const Mask& m) {
  int x0 = m.width(), y0 = m.height(), x1 = -1, y1 = -1;
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      if (m.at(x, y)) {
        x0 = std::min(x0, x);
        y0 = std::min(y0, y);
        x1 = std::max(x1, x);
        y1 = std::max(y1, y);
      }
    }
  }
  if (x1 < 0) return {};
  return {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

}  // namespace roaderaser

#endif  // ROADERASER_IMAGE_HPP_
