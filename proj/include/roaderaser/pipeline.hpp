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

// End-to-end pipeline: configuration, dataset layout and the commands behind
// the command-line tool.
//
// Dataset directory layout (all PNG):
//   images/<id>.png      8-bit RGB
//   labels/<id>.png      8-bit, 0 road / 1 obstacle / 255 ignore
//   roi/<id>.png         8-bit, 0/1 drivable area
//   semantic/<id>.png    16-bit class ids (optional), classes in vocab.json
//   inpainted/<id>.png   8-bit RGB (training sets only)
//   manifest.json

#ifndef ROADERASER_PIPELINE_HPP_
#define ROADERASER_PIPELINE_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "roaderaser/discrepancy_model.hpp"
#include "roaderaser/drivable_area.hpp"
#include "roaderaser/evaluation.hpp"
#include "roaderaser/inpaint_fusion.hpp"
#include "roaderaser/synthetic_obstacles.hpp"

namespace roaderaser {

enum class Variant { kFull, kNoInpainting, kNoDiscrepancy, kSegmentationAlone, kNoNoiseAug, kNoBlur };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);
// True for variants scored by a trained network.
bool variant_needs_model(Variant v);

// Invalid or inconsistent configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PipelineConfig {
  static constexpr int kVersion = 1;

  int version = kVersion;
  std::uint64_t seed = 0;
  int jobs = 1;
  Variant variant = Variant::kFull;
  RoiSource roi_source = RoiSource::kGroundTruth;
  std::string output_dir = "runs/default";
  std::string checkpoint;  // empty: <output_dir>/train/<variant>/best.ckpt

  // generate-data
  std::string data_source = "toy";   // toy | directory
  std::string data_kind = "training";  // training | benchmark
  std::string source_dir;            // images/, semantic/, instances/, vocab.json
  int toy_frames = 64;
  int toy_width = 256;
  int toy_height = 128;
  int toy_cutout_frames = 16;        // off-road scenes that supply cutouts

  // Dataset locations.
  std::string data_dir = "data/train";  // generate-data output, train input
  std::string validation_dir;           // empty: split off validation_fraction
  double validation_fraction = 0.1;
  std::string eval_dir = "data/test";   // infer / evaluate frames

  // Inpainting.
  std::string inpainter = "baseline";  // baseline | external
  std::string inpainter_command;       // external: uses {image} {mask} {output}
  int patch_side = kDefaultPatchSide;
  double overlap = kDefaultOverlap;
  DiffusionOptions diffusion;

  PasteConfig paste;
  CutoutFilter cutout_filter;

  std::string model_preset = "vgg16";  // vgg16 | small
  bool pretrained_backbone = false;
  std::string backbone_weights;
  TrainConfig train;  // seed, jobs and variant switches are filled in per run

  bool save_inpainted = false;
  std::vector<Variant> ablate_variants = {Variant::kFull,           Variant::kNoInpainting,
                                          Variant::kNoDiscrepancy,  Variant::kSegmentationAlone,
                                          Variant::kNoNoiseAug,     Variant::kNoBlur};
  bool ablate_train_missing = false;

  // Throws ConfigError.
  void validate() const;
  ModelConfig model_config() const;
  // Training settings for `v` (augmentation switches, seed, jobs).
  TrainConfig train_config(Variant v) const;
  std::filesystem::path checkpoint_for(Variant v) const;

  // Flat "key: value" YAML with every key present.
  std::string to_yaml() const;
  static PipelineConfig from_yaml(const std::string& text);
  static PipelineConfig load(const std::filesystem::path& path);
  // Assigns one dotted key from YAML scalar text; throws ConfigError.
  void set(const std::string& key, const std::string& value);
  void save(const std::filesystem::path& path) const;
  // 16 hex digits identifying the configuration.
  std::string hash() const;

  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

struct FrameRecord {
  std::string id;
  std::filesystem::path image;
  std::filesystem::path labels;     // empty when absent
  std::filesystem::path roi;        // empty when absent
  std::filesystem::path semantic;   // empty when absent
  std::filesystem::path inpainted;  // empty when absent
};

// Frames of a dataset directory, sorted by id. Throws ConfigError listing
// frames that miss any of `required` ("labels", "roi", "semantic",
// "inpainted") or whose rasters differ in size from the image.
std::vector<FrameRecord> list_frames(const std::filesystem::path& dir,
                                     const std::vector<std::string>& required = {});

// Counters a command reports back; `failed_frames` > 0 means exit code 1.
struct CommandResult {
  std::size_t frames = 0;
  std::vector<std::string> failed_frames;
  std::filesystem::path output;
  nlohmann::json summary;
};

struct CommandOptions {
  bool force = false;  // overwrite existing outputs
};

CommandResult cmd_generate_data(const PipelineConfig& cfg, const CommandOptions& opt = {});
CommandResult cmd_train(const PipelineConfig& cfg, const CommandOptions& opt = {});
CommandResult cmd_infer(const PipelineConfig& cfg, const CommandOptions& opt = {});
CommandResult cmd_evaluate(const PipelineConfig& cfg, const CommandOptions& opt = {});
CommandResult cmd_ablate(const PipelineConfig& cfg, const CommandOptions& opt = {});

// Stems of the PNG files in `dir`, sorted; empty if `dir` does not exist.
std::vector<std::string> list_png_ids(const std::filesystem::path& dir);

// Output locations under cfg.output_dir.
std::filesystem::path train_dir(const PipelineConfig& cfg, Variant v);
std::filesystem::path infer_dir(const PipelineConfig& cfg, Variant v);
std::filesystem::path eval_dir(const PipelineConfig& cfg, Variant v);

// Per-frame scoring used by cmd_infer. `model` may be null for variants that
// do not need one. Never looks at labels.
struct InferInputs {
  RgbImage image;
  Mask roi;
  std::optional<LabelMap> semantic;
  std::vector<int> road_ids;
};
struct InferOutputs {
  Heatmap heatmap;
  RgbImage inpainted;  // empty for variants that skip inpainting
};
InferOutputs score_frame(const PipelineConfig& cfg, Variant v, const InferInputs& in,
                         const Inpainter& inpainter, const DiscrepancyModel* model);

// Mean absolute RGB difference per pixel, zero outside `roi`.
Heatmap rgb_l1_score(const RgbImage& a, const RgbImage& b, const Mask& roi);

// Rounds to the 8-bit grid used for stored images.
RgbImage quantize_u8(const RgbImage& image);

std::string code_version();

}  // namespace roaderaser

#endif  // ROADERASER_PIPELINE_HPP_
