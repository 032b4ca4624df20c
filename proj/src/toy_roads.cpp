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

// Procedural "toy roads": small street scenes with textured asphalt, lane
// markings, sidewalks and either off-road objects (cutout sources) or
// unusual obstacles on the road (evaluation frames).

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>

#include "roaderaser/synthetic_obstacles.hpp"

namespace roaderaser {
namespace {

using Color = std::array<float, 3>;

float uniform(Rng& rng, float lo, float hi) {
  return std::uniform_real_distribution<float>(lo, hi)(rng);
}
int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// Bilinearly interpolated value noise with the given cell size.
std::vector<float> value_noise(int w, int h, int cell, float amplitude, Rng& rng) {
  std::vector<float> out(static_cast<std::size_t>(w) * h, 0.0f);
  if (amplitude <= 0) return out;
  std::normal_distribution<float> normal(0.0f, amplitude);
  if (cell <= 1) {
    for (float& v : out) v = normal(rng);
    return out;
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
      out[static_cast<std::size_t>(y) * w + x] =
          (g(x0, y0) * (1 - tx) + g(x0 + 1, y0) * tx) * (1 - ty) +
          (g(x0, y0 + 1) * (1 - tx) + g(x0 + 1, y0 + 1) * tx) * ty;
    }
  }
  return out;
}

Color random_vivid(Rng& rng) {
  // Random hue at moderate-to-high saturation.
  const float h = uniform(rng, 0.0f, 6.0f);
  const float s = uniform(rng, 0.4f, 0.95f);
  const float v = uniform(rng, 0.25f, 0.95f);
  const int i = static_cast<int>(h) % 6;
  const float f = h - std::floor(h);
  const float p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
  switch (i) {
    case 0: return {v, t, p};
    case 1: return {q, v, p};
    case 2: return {p, v, t};
    case 3: return {p, q, v};
    case 4: return {t, p, v};
    default: return {v, p, q};
  }
}

class Scene {
 public:
  Scene(const ToyRoadConfig& cfg, Rng& rng) : cfg_(cfg), rng_(rng) {
    frame_.image = make_rgb(cfg.width, cfg.height);
    frame_.semantic = LabelMap(cfg.width, cfg.height, 1, toy_class::kSky);
    frame_.instances = LabelMap(cfg.width, cfg.height, 1, 0);
    frame_.labels = make_mask(cfg.width, cfg.height, kIgnoreLabel);
    frame_.roi = make_mask(cfg.width, cfg.height);
  }

  int w() const { return cfg_.width; }
  int h() const { return cfg_.height; }

  void set(int x, int y, const Color& c, int cls, int inst = 0) {
    if (x < 0 || y < 0 || x >= w() || y >= h()) return;
    for (int k = 0; k < 3; ++k) frame_.image.at(x, y, k) = std::clamp(c[k], 0.0f, 1.0f);
    frame_.semantic.at(x, y) = static_cast<std::uint16_t>(cls);
    frame_.instances.at(x, y) = static_cast<std::uint16_t>(inst);
  }
  void tint(int x, int y, float delta) {
    if (x < 0 || y < 0 || x >= w() || y >= h()) return;
    for (int k = 0; k < 3; ++k) {
      frame_.image.at(x, y, k) = std::clamp(frame_.image.at(x, y, k) + delta, 0.0f, 1.0f);
    }
  }
  void paint(int x, int y, const Color& c) {
    if (x < 0 || y < 0 || x >= w() || y >= h()) return;
    for (int k = 0; k < 3; ++k) frame_.image.at(x, y, k) = std::clamp(c[k], 0.0f, 1.0f);
  }
  int cls(int x, int y) const { return frame_.semantic.at(x, y); }

  void layout() {
    horizon_ = static_cast<int>(h() * uniform(rng_, 0.30f, 0.40f));
    center_ = w() * (0.5f + uniform(rng_, -0.08f, 0.08f));
    half_top_ = w() * uniform(rng_, 0.04f, 0.09f);
    half_bottom_ = w() * uniform(rng_, 0.40f, 0.55f);
    sidewalk_ = uniform(rng_, 0.15f, 0.30f);
  }

  float road_half_width(int y) const {
    const float t = static_cast<float>(y - horizon_) / std::max(1, h() - horizon_);
    return half_top_ + t * (half_bottom_ - half_top_);
  }
  bool is_road(int x, int y) const {
    return y >= horizon_ && std::abs(x + 0.5f - center_) < road_half_width(y);
  }
  bool is_sidewalk(int x, int y) const {
    if (y < horizon_ || is_road(x, y)) return false;
    return std::abs(x + 0.5f - center_) < road_half_width(y) * (1.0f + sidewalk_);
  }
  // Perspective scale: 0 at the horizon, 1 at the bottom row.
  float depth_scale(int y) const {
    return static_cast<float>(y - horizon_) / std::max(1, h() - horizon_);
  }

  void draw_background() {
    const int band_top = std::max(2, horizon_ - static_cast<int>(h() * uniform(rng_, 0.10f, 0.25f)));
    const Color sky_top{uniform(rng_, 0.35f, 0.55f), uniform(rng_, 0.55f, 0.70f), uniform(rng_, 0.80f, 0.95f)};
    for (int y = 0; y < horizon_; ++y) {
      const float t = static_cast<float>(y) / std::max(1, horizon_);
      for (int x = 0; x < w(); ++x) {
        set(x, y, {sky_top[0] + 0.25f * t, sky_top[1] + 0.15f * t, sky_top[2]}, toy_class::kSky);
      }
    }
    // Buildings: contiguous blocks with window grids.
    for (int x = 0; x < w();) {
      const int bw = uniform_int(rng_, 16, 48);
      const int top = band_top - uniform_int(rng_, 0, std::max(1, band_top - 1));
      const float g = uniform(rng_, 0.35f, 0.75f);
      const Color c{g + uniform(rng_, -0.05f, 0.1f), g, g - uniform(rng_, 0.0f, 0.1f)};
      const int win = uniform_int(rng_, 3, 6);
      for (int y = std::max(0, top); y < horizon_; ++y) {
        for (int xx = x; xx < std::min(w(), x + bw); ++xx) {
          const bool window = ((xx - x) % win == win / 2) && ((y - top) % win == win / 2);
          Color p = c;
          if (window) p = {c[0] * 0.5f, c[1] * 0.55f, c[2] * 0.65f};
          set(xx, y, p, toy_class::kBuilding);
        }
      }
      x += bw;
    }
    // Ground: vegetation, sidewalk and road below the horizon.
    const auto veg = value_noise(w(), h(), 4, 0.06f, rng_);
    const auto veg_fine = value_noise(w(), h(), 1, 0.04f, rng_);
    const Color side{uniform(rng_, 0.55f, 0.70f), 0, 0};
    const int pave = uniform_int(rng_, 5, 9);
    for (int y = horizon_; y < h(); ++y) {
      for (int x = 0; x < w(); ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * w() + x;
        if (is_sidewalk(x, y)) {
          const bool joint = (x % pave == 0) || (y % pave == 0);
          const float v = side[0] - (joint ? 0.06f : 0.0f) + veg_fine[i] * 0.5f;
          set(x, y, {v, v * 0.98f, v * 0.95f}, toy_class::kSidewalk);
        } else if (!is_road(x, y)) {
          const float n = veg[i] + veg_fine[i];
          set(x, y, {0.18f + n, 0.42f + n, 0.14f + n * 0.5f}, toy_class::kVegetation);
        }
      }
    }
  }

  void draw_road() {
    const float g = uniform(rng_, 0.25f, 0.55f);
    const Color base{g + uniform(rng_, -0.03f, 0.03f), g, g + uniform(rng_, -0.03f, 0.03f)};
    const auto fine = value_noise(w(), h(), 1, uniform(rng_, 0.01f, 0.05f), rng_);
    const auto coarse = value_noise(w(), h(), 8, uniform(rng_, 0.0f, 0.05f), rng_);
    const float speck_density = uniform(rng_, 0.0f, 0.03f);
    std::bernoulli_distribution speck(speck_density);
    for (int y = horizon_; y < h(); ++y) {
      for (int x = 0; x < w(); ++x) {
        if (!is_road(x, y)) continue;
        const std::size_t i = static_cast<std::size_t>(y) * w() + x;
        float n = fine[i] + coarse[i];
        if (speck(rng_)) n += uniform(rng_, -0.15f, 0.15f);
        set(x, y, {base[0] + n, base[1] + n, base[2] + n}, toy_class::kRoad);
      }
    }
    // Repair patches and stains.
    for (int k = uniform_int(rng_, 0, 3); k > 0; --k) {
      const int py = uniform_int(rng_, horizon_ + 2, h() - 2);
      const float hw = road_half_width(py);
      const float px = center_ + uniform(rng_, -hw, hw);
      const int rw = uniform_int(rng_, 6, 40), rh = uniform_int(rng_, 4, 20);
      const float delta = uniform(rng_, -0.12f, 0.10f);
      const bool soft = std::bernoulli_distribution(0.5)(rng_);
      for (int y = py - rh / 2; y < py + rh / 2; ++y) {
        for (int x = static_cast<int>(px) - rw / 2; x < static_cast<int>(px) + rw / 2; ++x) {
          if (x < 0 || y < 0 || x >= w() || y >= h() || !is_road(x, y)) continue;
          float f = 1.0f;
          if (soft) {
            const float dx = (x - px) / (rw / 2.0f), dy = (y - py) / (rh / 2.0f);
            f = std::max(0.0f, 1.0f - (dx * dx + dy * dy));
          }
          tint(x, y, delta * f);
        }
      }
    }
    // Cracks: thin dark random walks.
    for (int k = uniform_int(rng_, 0, 2); k > 0; --k) {
      float x = center_ + uniform(rng_, -0.5f, 0.5f) * road_half_width(h() - 1);
      float y = static_cast<float>(uniform_int(rng_, horizon_ + 4, h() - 1));
      float dir = uniform(rng_, 0.0f, 6.2832f);
      for (int s = uniform_int(rng_, 10, 50); s > 0; --s) {
        const int ix = static_cast<int>(x), iy = static_cast<int>(y);
        if (ix >= 0 && iy >= 0 && ix < w() && iy < h() && is_road(ix, iy)) tint(ix, iy, -0.12f);
        dir += uniform(rng_, -0.5f, 0.5f);
        x += std::cos(dir);
        y += std::sin(dir);
      }
    }
    // Lane markings follow the perspective of the road.
    const bool yellow = std::bernoulli_distribution(0.3)(rng_);
    const Color paint_color = yellow ? Color{0.85f, 0.75f, 0.2f} : Color{0.9f, 0.9f, 0.88f};
    const float wear = uniform(rng_, 0.6f, 1.0f);
    const bool dashed_centre = std::bernoulli_distribution(0.85)(rng_);
    const bool edge_lines = std::bernoulli_distribution(0.5)(rng_);
    const int dash = uniform_int(rng_, 6, 12);
    for (int y = horizon_; y < h(); ++y) {
      const float t = depth_scale(y);
      const float lw = 0.6f + 2.5f * t;
      const float hw = road_half_width(y);
      const auto mark = [&](float cx) {
        for (int x = static_cast<int>(cx - lw / 2); x <= static_cast<int>(cx + lw / 2); ++x) {
          if (x < 0 || x >= w() || !is_road(x, y)) continue;
          Color c;
          for (int k = 0; k < 3; ++k) {
            c[k] = frame_.image.at(x, y, k) * (1 - wear) + paint_color[k] * wear;
          }
          paint(x, y, c);
        }
      };
      const int period = std::max(2, static_cast<int>(dash * (0.3f + t)));
      if (dashed_centre && ((y - horizon_) / period) % 2 == 0) mark(center_);
      if (edge_lines) {
        mark(center_ - hw * 0.92f);
        mark(center_ + hw * 0.92f);
      }
    }
  }

  // Filled shape given by an indicator over its bounding box.
  using Shape = std::function<bool(int, int)>;

  bool place_offroad(int bw, int bh, Pixel& tl) {
    for (int attempt = 0; attempt < 60; ++attempt) {
      tl = {uniform_int(rng_, 0, std::max(0, w() - bw)), uniform_int(rng_, 0, std::max(0, h() - bh))};
      bool ok = true;
      for (int y = tl.y; y < tl.y + bh && ok; ++y) {
        for (int x = tl.x; x < tl.x + bw && ok; ++x) {
          if (x >= w() || y >= h() || cls(x, y) == toy_class::kRoad) ok = false;
        }
      }
      if (ok) return true;
    }
    return false;
  }

  void draw_offroad_objects() {
    int next_instance = 1;
    for (int k = uniform_int(rng_, 3, 8); k > 0; --k) {
      const int kind = uniform_int(rng_, 0, 3);
      if (kind == 0) {  // person
        const int ph = uniform_int(rng_, 16, 44), pw = std::max(6, static_cast<int>(ph * uniform(rng_, 0.35f, 0.5f)));
        Pixel tl;
        if (!place_offroad(pw, ph, tl)) continue;
        const Color cloth = random_vivid(rng_);
        const Color skin{uniform(rng_, 0.45f, 0.9f), 0, 0};
        const Color legs{cloth[0] * 0.4f, cloth[1] * 0.4f, cloth[2] * 0.5f};
        const int inst = next_instance++;
        const int head = std::max(3, ph / 5);
        for (int y = 0; y < ph; ++y) {
          for (int x = 0; x < pw; ++x) {
            const float cx = (x + 0.5f) - pw / 2.0f;
            Color c;
            bool in = false;
            if (y < head) {
              const float cy = y + 0.5f - head / 2.0f;
              in = cx * cx + cy * cy <= (head / 2.0f) * (head / 2.0f) + 0.5f;
              c = {skin[0], skin[0] * 0.75f, skin[0] * 0.6f};
            } else if (y < ph * 0.62f) {
              in = std::abs(cx) <= pw / 2.0f;
              c = cloth;
            } else {
              in = std::abs(std::abs(cx) - pw / 4.0f) <= pw / 5.0f + 0.5f;
              c = legs;
            }
            if (in) set(tl.x + x, tl.y + y, c, toy_class::kPerson, inst);
          }
        }
      } else if (kind == 1) {  // car
        const int cw = uniform_int(rng_, 22, 64), ch = std::max(10, static_cast<int>(cw * uniform(rng_, 0.4f, 0.55f)));
        Pixel tl;
        if (!place_offroad(cw, ch, tl)) continue;
        const Color body = random_vivid(rng_);
        const int inst = next_instance++;
        for (int y = 0; y < ch; ++y) {
          for (int x = 0; x < cw; ++x) {
            const bool roof = y < ch * 0.4f;
            if (roof && (x < cw * 0.2f || x > cw * 0.8f)) continue;
            Color c = body;
            if (roof && y > ch * 0.1f && x > cw * 0.25f && x < cw * 0.75f) c = {0.15f, 0.18f, 0.22f};
            const float wy = y - ch * 0.85f;
            for (float wx : {cw * 0.25f, cw * 0.75f}) {
              const float dx = x + 0.5f - wx;
              if (wy > -ch * 0.2f && dx * dx + wy * wy < (ch * 0.18f) * (ch * 0.18f)) c = {0.05f, 0.05f, 0.05f};
            }
            set(tl.x + x, tl.y + y, c, toy_class::kCar, inst);
          }
        }
      } else if (kind == 2) {  // traffic sign: disc with border
        const int d = uniform_int(rng_, 11, 24);
        Pixel tl;
        if (!place_offroad(d, d, tl)) continue;
        const bool red = std::bernoulli_distribution(0.5)(rng_);
        const Color rim = red ? Color{0.8f, 0.1f, 0.1f} : Color{0.1f, 0.25f, 0.75f};
        for (int y = 0; y < d; ++y) {
          for (int x = 0; x < d; ++x) {
            const float dx = x + 0.5f - d / 2.0f, dy = y + 0.5f - d / 2.0f;
            const float r = std::sqrt(dx * dx + dy * dy);
            if (r > d / 2.0f) continue;
            const Color c = r > d * 0.32f ? rim : Color{0.92f, 0.92f, 0.92f};
            set(tl.x + x, tl.y + y, c, toy_class::kTrafficSign);
          }
        }
      } else {  // traffic light
        const int lw = uniform_int(rng_, 7, 11), lh = lw * 3;
        Pixel tl;
        if (!place_offroad(lw, lh, tl)) continue;
        const Color lamps[3] = {{0.9f, 0.1f, 0.1f}, {0.9f, 0.8f, 0.1f}, {0.1f, 0.85f, 0.3f}};
        const int lit = uniform_int(rng_, 0, 2);
        for (int y = 0; y < lh; ++y) {
          for (int x = 0; x < lw; ++x) {
            Color c{0.12f, 0.12f, 0.12f};
            const int slot = y / lw;
            const float dx = x + 0.5f - lw / 2.0f, dy = (y % lw) + 0.5f - lw / 2.0f;
            if (dx * dx + dy * dy < (lw * 0.3f) * (lw * 0.3f)) {
              c = slot == lit ? lamps[slot] : Color{lamps[slot][0] * 0.3f, lamps[slot][1] * 0.3f, lamps[slot][2] * 0.3f};
            }
            set(tl.x + x, tl.y + y, c, toy_class::kTrafficLight);
          }
        }
      }
    }
  }

  void draw_road_obstacles() {
    for (int k = uniform_int(rng_, 1, 4); k > 0; --k) {
      for (int attempt = 0; attempt < 40; ++attempt) {
        const int cy = uniform_int(rng_, horizon_ + (h() - horizon_) / 4, h() - 3);
        const float t = depth_scale(cy);
        const int size = std::max(5, static_cast<int>((6 + 30 * t) * uniform(rng_, 0.6f, 1.2f)));
        const int ow = std::max(4, static_cast<int>(size * uniform(rng_, 0.6f, 1.5f)));
        const int oh = std::max(4, static_cast<int>(size * uniform(rng_, 0.5f, 1.1f)));
        const float hw = road_half_width(cy);
        const int cx = static_cast<int>(center_ + uniform(rng_, -hw * 0.85f, hw * 0.85f));
        const Pixel tl{cx - ow / 2, cy - oh / 2};
        const int shape = uniform_int(rng_, 0, 3);
        const Shape inside = [&, shape](int x, int y) {
          const float u = (x + 0.5f) / ow * 2 - 1, v = (y + 0.5f) / oh * 2 - 1;
          switch (shape) {
            case 0: return true;                                 // box
            case 1: return u * u + v * v <= 1.0f;                // round
            case 2: return std::abs(u) <= (v + 1) / 2;           // cone / triangle
            default: return std::abs(u) + std::abs(v) <= 1.2f;  // irregular
          }
        };
        bool fits = true;
        for (int y = 0; y < oh && fits; ++y) {
          for (int x = 0; x < ow && fits; ++x) {
            const int X = tl.x + x, Y = tl.y + y;
            if (!inside(x, y)) continue;
            if (X < 0 || Y < 0 || X >= w() || Y >= h() || cls(X, Y) != toy_class::kRoad) fits = false;
          }
        }
        if (!fits) continue;
        const bool road_like = std::bernoulli_distribution(0.2)(rng_);
        Color c = random_vivid(rng_);
        if (road_like) {
          const float g = uniform(rng_, 0.1f, 0.9f);
          c = {g, g * 0.97f, g * 0.93f};
        }
        const bool striped = std::bernoulli_distribution(0.3)(rng_);
        const int stripe = uniform_int(rng_, 2, 4);
        for (int y = 0; y < oh; ++y) {
          for (int x = 0; x < ow; ++x) {
            if (!inside(x, y)) continue;
            const float shade = 1.0f - 0.35f * static_cast<float>(y) / oh;
            Color p{c[0] * shade, c[1] * shade, c[2] * shade};
            if (striped && ((x + y) / stripe) % 2 == 0) p = {0.95f, 0.95f, 0.95f};
            set(tl.x + x, tl.y + y, p, toy_class::kObstacle);
          }
        }
        break;
      }
    }
  }

  ToyFrame finish() {
    for (int y = 0; y < h(); ++y) {
      for (int x = 0; x < w(); ++x) {
        const int c = cls(x, y);
        if (c == toy_class::kRoad || c == toy_class::kSidewalk) {
          frame_.roi.at(x, y) = 1;
          frame_.labels.at(x, y) = 0;
        } else if (c == toy_class::kObstacle) {
          frame_.roi.at(x, y) = 1;
          frame_.labels.at(x, y) = 1;
        }
      }
    }
    return std::move(frame_);
  }

 private:
  const ToyRoadConfig& cfg_;
  Rng& rng_;
  ToyFrame frame_;
  int horizon_ = 0;
  float center_ = 0, half_top_ = 0, half_bottom_ = 0, sidewalk_ = 0;
};

}  // namespace

ClassVocabulary toy_vocabulary() {
  ClassVocabulary v;
  v.names = {{toy_class::kSky, "sky"},
             {toy_class::kBuilding, "building"},
             {toy_class::kVegetation, "vegetation"},
             {toy_class::kRoad, "road"},
             {toy_class::kSidewalk, "sidewalk"},
             {toy_class::kPerson, "person"},
             {toy_class::kCar, "car"},
             {toy_class::kTrafficSign, "traffic sign"},
             {toy_class::kTrafficLight, "traffic light"},
             {toy_class::kObstacle, "obstacle"}};
  v.road_classes = {"road", "sidewalk"};
  v.instance_classes = {"person", "car"};
  v.component_classes = {"traffic light", "traffic sign"};
  return v;
}

ToyFrame generate_toy_frame(const ToyRoadConfig& config, std::uint64_t seed,
                            ToyContent content) {
  if (config.width < 16 || config.height < 16) {
    throw std::invalid_argument("generate_toy_frame: frame must be at least 16x16");
  }
  Rng rng(seed);
  Scene scene(config, rng);
  scene.layout();
  scene.draw_background();
  scene.draw_road();
  if (content == ToyContent::kOffRoadObjects) scene.draw_offroad_objects();
  if (content == ToyContent::kRoadObstacles) scene.draw_road_obstacles();
  return scene.finish();
}

}  // namespace roaderaser
