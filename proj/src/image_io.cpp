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

#include "roaderaser/image_io.hpp"

#include <opencv2/imgcodecs.hpp>

#include <fmt/format.h>

namespace roaderaser::io {
namespace {

cv::Mat load(const std::filesystem::path& path, int flags) {
  cv::Mat m = cv::imread(path.string(), flags);
  if (m.empty()) {
    throw std::runtime_error(fmt::format("cannot read image '{}'", path.string()));
  }
  return m;
}

void store(const std::filesystem::path& path, const cv::Mat& m) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  // Fixed compression level keeps files byte-stable across runs.
  const std::vector<int> params = {cv::IMWRITE_PNG_COMPRESSION, 3};
  if (!cv::imwrite(path.string(), m, params)) {
    throw std::runtime_error(fmt::format("cannot write image '{}'", path.string()));
  }
}

}  // namespace

RgbImage read_rgb(const std::filesystem::path& path) {
  cv::Mat m = load(path, cv::IMREAD_COLOR);
  RgbImage out = make_rgb(m.cols, m.rows);
  for (int y = 0; y < m.rows; ++y) {
    const auto* row = m.ptr<cv::Vec3b>(y);
    for (int x = 0; x < m.cols; ++x) {
      // OpenCV stores BGR.
      out.at(x, y, 0) = row[x][2] / 255.0f;
      out.at(x, y, 1) = row[x][1] / 255.0f;
      out.at(x, y, 2) = row[x][0] / 255.0f;
    }
  }
  return out;
}

void write_rgb(const std::filesystem::path& path, const RgbImage& image) {
  if (image.channels() != 3) throw std::invalid_argument("write_rgb: need 3 channels");
  cv::Mat m(image.height(), image.width(), CV_8UC3);
  for (int y = 0; y < image.height(); ++y) {
    auto* row = m.ptr<cv::Vec3b>(y);
    for (int x = 0; x < image.width(); ++x) {
      row[x] = cv::Vec3b(to_u8(image.at(x, y, 2)), to_u8(image.at(x, y, 1)),
                         to_u8(image.at(x, y, 0)));
    }
  }
  store(path, m);
}

Mask read_mask(const std::filesystem::path& path) {
  cv::Mat m = load(path, cv::IMREAD_GRAYSCALE);
  Mask out = make_mask(m.cols, m.rows);
  for (int y = 0; y < m.rows; ++y) {
    const auto* row = m.ptr<std::uint8_t>(y);
    std::copy(row, row + m.cols, &out.at(0, y));
  }
  return out;
}

void write_mask(const std::filesystem::path& path, const Mask& mask) {
  cv::Mat m(mask.height(), mask.width(), CV_8UC1);
  for (int y = 0; y < mask.height(); ++y) {
    std::copy(&mask.at(0, y), &mask.at(0, y) + mask.width(), m.ptr<std::uint8_t>(y));
  }
  store(path, m);
}

LabelMap read_label_map(const std::filesystem::path& path) {
  cv::Mat m = load(path, cv::IMREAD_UNCHANGED);
  if (m.channels() != 1) {
    throw std::runtime_error(
        fmt::format("label map '{}' must be single-channel", path.string()));
  }
  if (m.depth() == CV_8U) m.convertTo(m, CV_16U);
  if (m.depth() != CV_16U) {
    throw std::runtime_error(
        fmt::format("label map '{}' must be 8- or 16-bit", path.string()));
  }
  LabelMap out(m.cols, m.rows, 1);
  for (int y = 0; y < m.rows; ++y) {
    const auto* row = m.ptr<std::uint16_t>(y);
    std::copy(row, row + m.cols, &out.at(0, y));
  }
  return out;
}

void write_label_map(const std::filesystem::path& path, const LabelMap& map) {
  cv::Mat m(map.height(), map.width(), CV_16UC1);
  for (int y = 0; y < map.height(); ++y) {
    std::copy(&map.at(0, y), &map.at(0, y) + map.width(), m.ptr<std::uint16_t>(y));
  }
  store(path, m);
}

Heatmap read_heatmap(const std::filesystem::path& path) {
  cv::Mat m = load(path, cv::IMREAD_UNCHANGED);
  if (m.channels() != 1 || m.depth() != CV_16U) {
    throw std::runtime_error(
        fmt::format("heatmap '{}' must be 16-bit grayscale", path.string()));
  }
  Heatmap out = make_heatmap(m.cols, m.rows);
  for (int y = 0; y < m.rows; ++y) {
    const auto* row = m.ptr<std::uint16_t>(y);
    for (int x = 0; x < m.cols; ++x) out.at(x, y) = row[x] / 65535.0f;
  }
  return out;
}

void write_heatmap(const std::filesystem::path& path, const Heatmap& heatmap) {
  cv::Mat m(heatmap.height(), heatmap.width(), CV_16UC1);
  for (int y = 0; y < heatmap.height(); ++y) {
    auto* row = m.ptr<std::uint16_t>(y);
    for (int x = 0; x < heatmap.width(); ++x) row[x] = to_u16(heatmap.at(x, y));
  }
  store(path, m);
}

}  // namespace roaderaser::io
