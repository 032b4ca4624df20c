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
#include <array>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>

#include <fmt/format.h>

#include "roaderaser/image_io.hpp"
#include "roaderaser/inpaint_fusion.hpp"

namespace roaderaser {
namespace {

constexpr std::array<Pixel, 4> kNeighbours = {{{0, -1}, {-1, 0}, {1, 0}, {0, 1}}};

bool touches_all_borders(const Mask& hole) {
  bool top = false, bottom = false, left = false, right = false;
  const int w = hole.width(), h = hole.height();
  for (int x = 0; x < w; ++x) {
    top |= hole.at(x, 0) != 0;
    bottom |= hole.at(x, h - 1) != 0;
  }
  for (int y = 0; y < h; ++y) {
    left |= hole.at(0, y) != 0;
    right |= hole.at(w - 1, y) != 0;
  }
  return top && bottom && left && right;
}

std::array<double, 3> visible_mean(const RgbImage& img, const Mask& hole) {
  std::array<double, 3> sum{};
  std::size_t n = 0;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (hole.at(x, y)) continue;
      for (int c = 0; c < 3; ++c) sum[c] += img.at(x, y, c);
      ++n;
    }
  }
  if (n == 0) return sum;
  for (double& s : sum) s /= static_cast<double>(n);
  return sum;
}

void gauss_seidel(RgbImage& img, const std::vector<Pixel>& holes,
                  const DiffusionOptions& opt) {
  for (int it = 0; it < opt.max_iterations; ++it) {
    float max_update = 0.0f;
    for (const Pixel& p : holes) {
      std::array<float, 3> sum{};
      int n = 0;
      for (const Pixel& d : kNeighbours) {
        const int nx = p.x + d.x, ny = p.y + d.y;
        if (nx < 0 || ny < 0 || nx >= img.width() || ny >= img.height()) continue;
        for (int c = 0; c < 3; ++c) sum[c] += img.at(nx, ny, c);
        ++n;
      }
      for (int c = 0; c < 3; ++c) {
        const float v = sum[c] / static_cast<float>(n);
        max_update = std::max(max_update, std::abs(v - img.at(p.x, p.y, c)));
        img.at(p.x, p.y, c) = v;
      }
    }
    if (max_update < opt.tolerance) break;
  }
}

// Fills hole pixels of `img` in place. At least one visible pixel must exist.
void solve(RgbImage& img, const Mask& hole, const DiffusionOptions& opt) {
  std::vector<Pixel> holes;
  for (int y = 0; y < hole.height(); ++y) {
    for (int x = 0; x < hole.width(); ++x) {
      if (hole.at(x, y)) holes.push_back({x, y});
    }
  }
  if (holes.empty()) return;

  const int w = img.width(), h = img.height();
  if (opt.multiscale_init && w >= 8 && h >= 8 && holes.size() > 16) {
    const int cw = (w + 1) / 2, ch = (h + 1) / 2;
    RgbImage coarse = make_rgb(cw, ch);
    Mask coarse_hole = make_mask(cw, ch, 1);
    for (int y = 0; y < ch; ++y) {
      for (int x = 0; x < cw; ++x) {
        std::array<float, 3> sum{};
        int n = 0;
        for (int dy = 0; dy < 2; ++dy) {
          for (int dx = 0; dx < 2; ++dx) {
            const int fx = std::min(2 * x + dx, w - 1), fy = std::min(2 * y + dy, h - 1);
            if (hole.at(fx, fy)) continue;
            for (int c = 0; c < 3; ++c) sum[c] += img.at(fx, fy, c);
            ++n;
          }
        }
        if (n == 0) continue;
        coarse_hole.at(x, y) = 0;
        for (int c = 0; c < 3; ++c) coarse.at(x, y, c) = sum[c] / static_cast<float>(n);
      }
    }
    solve(coarse, coarse_hole, opt);
    for (const Pixel& p : holes) {
      for (int c = 0; c < 3; ++c) img.at(p.x, p.y, c) = coarse.at(p.x / 2, p.y / 2, c);
    }
  } else {
    const auto mean = visible_mean(img, hole);
    for (const Pixel& p : holes) {
      for (int c = 0; c < 3; ++c) img.at(p.x, p.y, c) = static_cast<float>(mean[c]);
    }
  }
  gauss_seidel(img, holes, opt);
}

}  // namespace

RgbImage baseline_inpaint(const RgbImage& context, const Mask& hole,
                          const DiffusionOptions& options) {
  if (!context.same_shape(hole) || context.channels() != 3) {
    throw std::invalid_argument("baseline_inpaint: context and hole sizes differ");
  }
  RgbImage out = context;
  if (context.empty() || count_nonzero(hole) == 0) return out;

  if (touches_all_borders(hole)) {
    const bool any_visible = count_nonzero(hole) < hole.pixel_count();
    std::array<double, 3> mean{};
    if (any_visible) {
      mean = visible_mean(context, hole);
    } else {
      for (int y = 0; y < context.height(); ++y) {
        for (int x = 0; x < context.width(); ++x) {
          for (int c = 0; c < 3; ++c) mean[c] += context.at(x, y, c);
        }
      }
      for (double& m : mean) m /= static_cast<double>(context.pixel_count());
    }
    for (int y = 0; y < context.height(); ++y) {
      for (int x = 0; x < context.width(); ++x) {
        if (!hole.at(x, y)) continue;
        for (int c = 0; c < 3; ++c) out.at(x, y, c) = static_cast<float>(mean[c]);
      }
    }
    return out;
  }

  solve(out, hole, options);
  return out;
}

ExternalInpainter::ExternalInpainter(std::string command_template, std::string work_dir)
    : command_template_(std::move(command_template)), work_dir_(std::move(work_dir)) {
  if (command_template_.empty()) {
    throw std::invalid_argument("external inpainter: empty command template");
  }
  std::filesystem::create_directories(work_dir_);
}

RgbImage ExternalInpainter::inpaint(const RgbImage& context, const Mask& hole) const {
  static std::atomic<unsigned long long> counter{0};
  const unsigned long long id = counter++;
  namespace fs = std::filesystem;
  const fs::path dir(work_dir_);
  const fs::path image_path = dir / fmt::format("fragment_{}.png", id);
  const fs::path mask_path = dir / fmt::format("hole_{}.png", id);
  const fs::path output_path = dir / fmt::format("filled_{}.png", id);

  struct Cleanup {
    std::vector<fs::path> paths;
    ~Cleanup() {
      std::error_code ec;
      for (const auto& p : paths) fs::remove(p, ec);
    }
  } cleanup{{image_path, mask_path, output_path}};

  io::write_rgb(image_path, context);
  Mask hole255 = hole;
  for (auto& v : hole255.data()) v = v ? 255 : 0;
  io::write_mask(mask_path, hole255);

  std::string cmd = command_template_;
  const auto substitute = [&cmd](const std::string& key, const std::string& value) {
    for (std::size_t pos = cmd.find(key); pos != std::string::npos;
         pos = cmd.find(key, pos + value.size())) {
      cmd.replace(pos, key.size(), value);
    }
  };
  substitute("{image}", image_path.string());
  substitute("{mask}", mask_path.string());
  substitute("{output}", output_path.string());

  const int status = std::system(cmd.c_str());
  if (status != 0) {
    throw std::runtime_error(
        fmt::format("external inpainter exited with status {}: {}", status, cmd));
  }
  return io::read_rgb(output_path);
}

}  // namespace roaderaser
