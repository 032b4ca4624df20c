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

#ifndef ROADERASER_DRIVABLE_AREA_HPP_
#define ROADERASER_DRIVABLE_AREA_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "roaderaser/image.hpp"

namespace roaderaser {

enum class RoiSource { kGroundTruth, kPredicted };

std::string to_string(RoiSource source);
RoiSource roi_source_from_string(const std::string& s);

struct RoiMask {
  Mask pixels;  // 0/1
  RoiSource source = RoiSource::kGroundTruth;
};

// Class vocabulary of a semantic map, read from a JSON sidecar:
//   {"classes": [{"id": 7, "name": "road"}, ...],
//    "road_classes": ["road", "sidewalk"],
//    "instance_classes": ["person", "car"],
//    "component_classes": ["traffic light", "traffic sign"]}
struct ClassVocabulary {
  std::map<int, std::string> names;
  std::vector<std::string> road_classes;
  std::vector<std::string> instance_classes;
  std::vector<std::string> component_classes;

  static ClassVocabulary parse(const std::string& json_text);
  static ClassVocabulary load(const std::filesystem::path& path);
  std::string dump() const;

  // Ids whose names appear in `class_names`; throws on unknown names.
  std::vector<int> ids_of(std::span<const std::string> class_names) const;
  std::vector<int> road_ids() const { return ids_of(road_classes); }

  // Throws if the map contains ids outside the vocabulary.
  void validate(const LabelMap& semantic) const;
};

// Drivable area: road-class pixels, plus every 4-connected non-road component
// that does not reach the image border, minus the ego-vehicle mask.
RoiMask derive_roi(const LabelMap& semantic, std::span<const int> road_ids,
                   const Mask* ego_mask = nullptr);

// Non-road components fully enclosed by the road (4-connectivity).
Mask enclosed_non_road(const LabelMap& semantic, std::span<const int> road_ids);

// "Segmentation alone" scorer: 1 on enclosed non-road components, 0 elsewhere.
Heatmap segmentation_alone_score(const LabelMap& semantic, std::span<const int> road_ids,
                                 const Mask* ego_mask = nullptr);

}  // namespace roaderaser

#endif  // ROADERASER_DRIVABLE_AREA_HPP_
