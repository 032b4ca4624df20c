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

#include "roaderaser/drivable_area.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace roaderaser {
namespace {

Mask road_mask(const LabelMap& semantic, std::span<const int> road_ids) {
  if (road_ids.empty()) throw std::invalid_argument("derive_roi: road_ids is empty");
  const std::set<int> ids(road_ids.begin(), road_ids.end());
  Mask road = make_mask(semantic.width(), semantic.height());
  for (std::size_t i = 0; i < semantic.pixel_count(); ++i) {
    road.data()[i] = ids.contains(semantic.data()[i]) ? 1 : 0;
  }
  return road;
}

// Labels 4-connected non-road components; keeps those not touching the border.
Mask enclosed_components(const Mask& road) {
  const int w = road.width(), h = road.height();
  Mask enclosed = make_mask(w, h);
  Mask visited = make_mask(w, h);
  std::vector<Pixel> component;
  std::vector<Pixel> stack;
  for (int sy = 0; sy < h; ++sy) {
    for (int sx = 0; sx < w; ++sx) {
      if (road.at(sx, sy) || visited.at(sx, sy)) continue;
      component.clear();
      bool touches_border = false;
      stack.push_back({sx, sy});
      visited.at(sx, sy) = 1;
      while (!stack.empty()) {
        const Pixel p = stack.back();
        stack.pop_back();
        component.push_back(p);
        if (p.x == 0 || p.y == 0 || p.x == w - 1 || p.y == h - 1) touches_border = true;
        const Pixel next[4] = {{p.x + 1, p.y}, {p.x - 1, p.y}, {p.x, p.y + 1}, {p.x, p.y - 1}};
        for (const Pixel& q : next) {
          if (q.x < 0 || q.y < 0 || q.x >= w || q.y >= h) continue;
          if (road.at(q.x, q.y) || visited.at(q.x, q.y)) continue;
          visited.at(q.x, q.y) = 1;
          stack.push_back(q);
        }
      }
      if (touches_border) continue;
      for (const Pixel& p : component) enclosed.at(p.x, p.y) = 1;
    }
  }
  return enclosed;
}

void check_ego(const LabelMap& semantic, const Mask* ego) {
  if (ego && !ego->same_shape(semantic)) {
    throw std::invalid_argument("derive_roi: ego mask dimensions differ from the map");
  }
}

}  // namespace

std::string to_string(RoiSource source) {
  return source == RoiSource::kGroundTruth ? "ground_truth" : "predicted";
}

RoiSource roi_source_from_string(const std::string& s) {
  if (s == "ground_truth") return RoiSource::kGroundTruth;
  if (s == "predicted") return RoiSource::kPredicted;
  throw std::invalid_argument(fmt::format("unknown ROI source '{}'", s));
}

ClassVocabulary ClassVocabulary::parse(const std::string& json_text) {
  const auto j = nlohmann::json::parse(json_text);
  ClassVocabulary v;
  for (const auto& c : j.at("classes")) {
    v.names[c.at("id").get<int>()] = c.at("name").get<std::string>();
  }
  v.road_classes = j.at("road_classes").get<std::vector<std::string>>();
  v.instance_classes = j.value("instance_classes", std::vector<std::string>{});
  v.component_classes = j.value("component_classes", std::vector<std::string>{});
  if (v.road_classes.empty()) {
    throw std::invalid_argument("class vocabulary declares no road classes");
  }
  (void)v.road_ids();  // validates names
  (void)v.ids_of(v.instance_classes);
  (void)v.ids_of(v.component_classes);
  return v;
}

ClassVocabulary ClassVocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string ClassVocabulary::dump() const {
  nlohmann::json j;
  j["classes"] = nlohmann::json::array();
  for (const auto& [id, name] : names) j["classes"].push_back({{"id", id}, {"name", name}});
  j["road_classes"] = road_classes;
  j["instance_classes"] = instance_classes;
  j["component_classes"] = component_classes;
  return j.dump(2);
}

std::vector<int> ClassVocabulary::ids_of(std::span<const std::string> class_names) const {
  std::vector<int> ids;
  for (const auto& n : class_names) {
    const auto it = std::find_if(names.begin(), names.end(),
                                 [&](const auto& kv) { return kv.second == n; });
    if (it == names.end()) {
      throw std::invalid_argument(fmt::format("class '{}' not in vocabulary", n));
    }
    ids.push_back(it->first);
  }
  return ids;
}

void ClassVocabulary::validate(const LabelMap& semantic) const {
  for (std::uint16_t id : semantic.data()) {
    if (!names.contains(id)) {
      throw std::invalid_argument(
          fmt::format("semantic map contains id {} outside the vocabulary", id));
    }
  }
}

Mask enclosed_non_road(const LabelMap& semantic, std::span<const int> road_ids) {
  return enclosed_components(road_mask(semantic, road_ids));
}

RoiMask derive_roi(const LabelMap& semantic, std::span<const int> road_ids,
                   const Mask* ego_mask) {
  check_ego(semantic, ego_mask);
  Mask roi = road_mask(semantic, road_ids);
  const Mask enclosed = enclosed_components(roi);
  for (std::size_t i = 0; i < roi.pixel_count(); ++i) {
    std::uint8_t v = roi.data()[i] | enclosed.data()[i];
    if (ego_mask && ego_mask->data()[i]) v = 0;
    roi.data()[i] = v;
  }
  return {std::move(roi), RoiSource::kPredicted};
}

Heatmap segmentation_alone_score(const LabelMap& semantic, std::span<const int> road_ids,
                                 const Mask* ego_mask) {
  check_ego(semantic, ego_mask);
  const Mask enclosed = enclosed_non_road(semantic, road_ids);
  Heatmap score = make_heatmap(semantic.width(), semantic.height());
  for (std::size_t i = 0; i < enclosed.pixel_count(); ++i) {
    const bool ego = ego_mask && ego_mask->data()[i];
    score.data()[i] = (enclosed.data()[i] && !ego) ? 1.0f : 0.0f;
  }
  return score;
}

}  // namespace roaderaser
