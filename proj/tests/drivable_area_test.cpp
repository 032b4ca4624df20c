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

#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"

namespace roaderaser {
namespace {

constexpr int kRoad = 1;
constexpr int kSidewalk = 2;
const std::vector<int> kRoadIds = {kRoad, kSidewalk};

// Parses rows of characters: '.' road, ',' sidewalk, digits other classes.
LabelMap from_rows(const std::vector<std::string>& rows) {
  LabelMap m(static_cast<int>(rows[0].size()), static_cast<int>(rows.size()), 1);
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      const char c = rows[y][x];
      m.at(x, y) = c == '.' ? kRoad : (c == ',' ? kSidewalk : static_cast<std::uint16_t>(c - '0' + 10));
    }
  }
  return m;
}

LabelMap random_map(std::mt19937_64& rng, int w, int h, double road_fraction) {
  std::bernoulli_distribution road(road_fraction);
  std::uniform_int_distribution<int> other(10, 13);
  LabelMap m(w, h, 1);
  for (auto& v : m.storage()) v = static_cast<std::uint16_t>(road(rng) ? (rng() % 2 ? kRoad : kSidewalk) : other(rng));
  return m;
}

TEST(DeriveRoi, AllRoadIsFullImage) {
  const LabelMap m(8, 6, 1, kRoad);
  const RoiMask roi = derive_roi(m, kRoadIds);
  EXPECT_EQ(count_nonzero(roi.pixels), 48u);
  EXPECT_EQ(roi.source, RoiSource::kPredicted);
}

TEST(DeriveRoi, NoRoadIsEmpty) {
  const LabelMap m(8, 6, 1, 11);
  EXPECT_EQ(count_nonzero(derive_roi(m, kRoadIds).pixels), 0u);
}

TEST(DeriveRoi, AnnulusIslandIsIncluded) {
  const LabelMap m = from_rows({
      "0000000",
      "0.....0",
      "0.,,,.0",
      "0.,3,.0",
      "0.,,,.0",
      "0.....0",
      "0000000",
  });
  const Mask roi = derive_roi(m, kRoadIds).pixels;
  EXPECT_EQ(roi.at(3, 3), 1);
  EXPECT_EQ(roi.at(0, 0), 0);
  EXPECT_EQ(count_nonzero(roi), 25u);
  const Heatmap seg = segmentation_alone_score(m, kRoadIds);
  EXPECT_EQ(seg.at(3, 3), 1.0f);
  EXPECT_EQ(seg.at(1, 1), 0.0f);
  EXPECT_EQ(seg.at(0, 0), 0.0f);
}

TEST(DeriveRoi, GapToBorderExcludesRegion) {
  // 16x16: a road ring whose right side has a one-pixel gap connecting the
  // inner region to the outside.
  std::vector<std::string> rows(16, std::string(16, '5'));
  for (int i = 2; i < 14; ++i) {
    rows[2][i] = rows[13][i] = '.';
    rows[i][2] = rows[i][13] = '.';
  }
  rows[8][13] = '5';
  const LabelMap m = from_rows(rows);
  const Mask roi = derive_roi(m, kRoadIds).pixels;
  EXPECT_EQ(roi.at(8, 8), 0);
  EXPECT_EQ(roi, oracle::flood_fill_roi(m, kRoadIds));
  // A diagonal-only contact is not a gap under 4-connectivity.
  rows[8][13] = '.';
  rows[7][13] = '5';
  rows[7][14] = '.';
  rows[6][14] = '5';
  EXPECT_EQ(derive_roi(from_rows(rows), kRoadIds).pixels,
            oracle::flood_fill_roi(from_rows(rows), kRoadIds));
}

TEST(DeriveRoi, MultiIslandFixtureMatchesOracle) {
  const LabelMap m = from_rows({
      "00000000000",
      "0.........0",
      "0.1...22..0",
      "0.....22..0",
      "0..3...4..1",
      "0.........1",
      "00000000000",
  });
  const Mask oracle_roi = oracle::flood_fill_roi(m, kRoadIds);
  EXPECT_EQ(derive_roi(m, kRoadIds).pixels, oracle_roi);
  const Heatmap seg = segmentation_alone_score(m, kRoadIds);
  for (const Pixel p : {Pixel{2, 2}, Pixel{6, 2}, Pixel{7, 3}, Pixel{3, 4}, Pixel{7, 4}}) {
    EXPECT_EQ(seg.at(p.x, p.y), 1.0f) << p.x << "," << p.y;
  }
  EXPECT_EQ(seg.at(10, 4), 0.0f);
}

TEST(DeriveRoi, EgoMaskIsRemoved) {
  const LabelMap m(10, 8, 1, kRoad);
  Mask ego = make_mask(10, 8);
  for (int x = 3; x < 7; ++x) ego.at(x, 7) = 1;
  const Mask roi = derive_roi(m, kRoadIds, &ego).pixels;
  EXPECT_EQ(count_nonzero(roi), 76u);
  EXPECT_EQ(roi.at(4, 7), 0);
}

TEST(DeriveRoi, RandomMapsMatchFloodFillOracle) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const LabelMap m = random_map(rng, 32, 32, 0.55 + 0.1 * (trial % 3));
    const Mask roi = derive_roi(m, kRoadIds).pixels;
    ASSERT_EQ(roi, oracle::flood_fill_roi(m, kRoadIds)) << "trial " << trial;
    const Heatmap seg = segmentation_alone_score(m, kRoadIds);
    for (int y = 0; y < 32; ++y) {
      for (int x = 0; x < 32; ++x) {
        const bool road = m.at(x, y) == kRoad || m.at(x, y) == kSidewalk;
        ASSERT_EQ(seg.at(x, y), roi.at(x, y) && !road ? 1.0f : 0.0f);
      }
    }
  }
}

TEST(DeriveRoi, IsIdempotent) {
  std::mt19937_64 rng(18);
  for (int trial = 0; trial < 20; ++trial) {
    const LabelMap m = random_map(rng, 24, 20, 0.6);
    const Mask roi = derive_roi(m, kRoadIds).pixels;
    LabelMap relabeled = m;
    for (int y = 0; y < 20; ++y) {
      for (int x = 0; x < 24; ++x) {
        if (roi.at(x, y)) relabeled.at(x, y) = kRoad;
      }
    }
    EXPECT_EQ(derive_roi(relabeled, kRoadIds).pixels, roi);
  }
}

TEST(ClassVocabulary, ParseLookupAndValidate) {
  const ClassVocabulary v = ClassVocabulary::parse(R"({
    "classes": [{"id": 0, "name": "road"}, {"id": 1, "name": "sidewalk"},
                {"id": 7, "name": "person"}],
    "road_classes": ["road", "sidewalk"],
    "instance_classes": ["person"],
    "component_classes": []})");
  EXPECT_EQ(v.road_ids(), (std::vector<int>{0, 1}));
  const std::vector<std::string> unknown = {"tree"};
  EXPECT_THROW(v.ids_of(unknown), std::invalid_argument);
  LabelMap m(2, 2, 1, 7);
  EXPECT_NO_THROW(v.validate(m));
  m.at(1, 1) = 3;
  EXPECT_THROW(v.validate(m), std::invalid_argument);
  EXPECT_EQ(ClassVocabulary::parse(v.dump()).names, v.names);
  EXPECT_EQ(roi_source_from_string(to_string(RoiSource::kPredicted)), RoiSource::kPredicted);
  EXPECT_THROW(roi_source_from_string("guess"), std::invalid_argument);
}

}  // namespace
}  // namespace roaderaser
