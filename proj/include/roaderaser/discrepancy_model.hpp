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

// Two-stream discrepancy network: a shared feature extractor applied to the
// (blurred) original image and to its inpainting, per-level fusion of the two
// streams by 1x1 convolution plus a point-wise correlation channel, and an
// up-convolution decoder with SeLU activations ending in a 2-way softmax.

#ifndef ROADERASER_DISCREPANCY_MODEL_HPP_
#define ROADERASER_DISCREPANCY_MODEL_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "roaderaser/image.hpp"
#include "roaderaser/nn/layers.hpp"
#include "roaderaser/synthetic_obstacles.hpp"

namespace roaderaser {

struct ModelConfig {
  // Convolution output channels per pyramid level; each level ends in a 2x2
  // max-pool whose output is the level's tap.
  std::vector<std::vector<int>> backbone;
  std::vector<int> fusion_channels;   // 1x1 fusion output per level
  std::vector<int> decoder_channels;  // decoder output at each level's input resolution
  bool pretrained_backbone = false;
  std::string backbone_weights;       // checkpoint supplying backbone.* tensors

  int levels() const { return static_cast<int>(backbone.size()); }
  // Inputs are padded to a multiple of this.
  int size_multiple() const { return 1 << levels(); }

  // Four-level CNN that trains on a CPU.
  static ModelConfig small();
  // small() with doubled convolutions in the two full-detail levels.
  static ModelConfig medium();
  // VGG16 convolution stack tapped after its first four pooling stages.
  static ModelConfig vgg16();

  // Throws ModelConfigError naming the offending level.
  void validate() const;

  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

class ModelConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct TrainConfig {
  int epochs = 65;
  double learning_rate = 1e-4;
  int plateau_patience = 5;
  double plateau_factor = 0.1;
  double pos_weight = 20.0;
  CropSize crop{768, 384};
  int batch_size = 4;
  std::uint64_t seed = 0;
  AugmentConfig augment;
  // "No inpainting" ablation: both streams receive the original image.
  bool two_copies = false;
  int jobs = 1;

  void validate() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

inline constexpr double kBceEps = 1e-7;

struct BceResult {
  double loss = 0.0;
  std::vector<double> grad;  // d loss / d pred; zero on excluded pixels
  double weight_sum = 0.0;
  std::size_t valid_pixels = 0;
  bool no_valid_pixels = false;
};

// Class-weighted binary cross entropy over pixels with target != 255 and a
// nonzero `roi` entry (an empty roi span means all pixels):
//   sum_i w_i * -[y_i log p_i + (1 - y_i) log(1 - p_i)] / sum_i w_i,
// with w_i = pos_weight on obstacle pixels and 1 elsewhere; p is clamped to
// [eps, 1 - eps].
BceResult weighted_bce(std::span<const double> pred, std::span<const std::uint8_t> target,
                       std::span<const std::uint8_t> roi, double pos_weight);

// Gradient buffers laid out like DiscrepancyModel::params().
using Gradients = std::vector<std::vector<float>>;

struct TrainingSample {
  RgbImage image;      // original stream (augmented / blurred)
  RgbImage inpainted;  // second stream
  Mask labels;         // 0 background, 1 obstacle, 255 ignore
  Mask roi;            // 0/1
};

class DiscrepancyModel {
 public:
  // Randomly initialized from `seed`.
  explicit DiscrepancyModel(ModelConfig config, std::uint64_t seed = 0);

  const ModelConfig& config() const { return config_; }
  std::vector<nn::Param>& params() { return params_; }
  const std::vector<nn::Param>& params() const { return params_; }
  std::size_t parameter_count() const;
  Gradients zero_gradients() const;

  // Obstacle probability per pixel, exactly zero outside `roi`.
  Heatmap forward(const RgbImage& original_blurred, const RgbImage& inpainted,
                  const Mask& roi) const;

  // Forward + backward on one sample; adds scale * d loss / d params into
  // `grads` and returns the sample loss.
  BceResult accumulate_gradients(const TrainingSample& sample, double pos_weight,
                                 double scale, Gradients& grads) const;

  // Loss of one sample without gradients.
  BceResult loss(const TrainingSample& sample, double pos_weight) const;

 private:
  struct Trace;
  struct Layout;

  void run(const RgbImage& a, const RgbImage& b, Trace& trace) const;
  void backward(Trace& trace, const nn::Tensor& dlogits, Gradients& grads, double scale) const;
  nn::Param& add_param(std::string name, std::vector<int> shape);

  ModelConfig config_;
  std::vector<nn::Param> params_;
  std::vector<std::size_t> backbone_idx_;  // weight index per backbone conv (bias = +1)
  std::vector<std::size_t> fusion_idx_;
  std::vector<std::size_t> up_idx_;
  std::vector<std::size_t> dec_idx_;
  std::size_t head_idx_ = 0;
};

// Builds and validates; loads backbone weights when the config asks for them.
DiscrepancyModel build_model(const ModelConfig& config, std::uint64_t seed = 0);

class Adam {
 public:
  explicit Adam(const std::vector<nn::Param>& params, double beta1 = 0.9,
                double beta2 = 0.999, double eps = 1e-8);
  void step(std::vector<nn::Param>& params, const Gradients& grads, double lr);

 private:
  double beta1_, beta2_, eps_;
  long long t_ = 0;
  Gradients m_, v_;
};

// Multiplies the learning rate by `factor` once `patience` consecutive
// epochs pass without the validation loss improving on its best value.
class PlateauScheduler {
 public:
  PlateauScheduler(double lr, int patience, double factor)
      : lr_(lr), patience_(patience), factor_(factor) {}
  // Returns true when this call reduced the learning rate.
  bool step(double val_loss);
  double lr() const { return lr_; }

 private:
  double lr_;
  int patience_;
  double factor_;
  double best_ = 0;
  bool has_best_ = false;
  int bad_epochs_ = 0;
};

struct HistoryRow {
  int epoch = 0;
  double train_loss = 0;
  double val_loss = 0;
  double lr = 0;
};

void write_history_csv(const std::filesystem::path& path, std::span<const HistoryRow> rows);

struct Checkpoint {
  static constexpr std::uint32_t kFormatVersion = 1;
  ModelConfig model;
  std::optional<TrainConfig> train;
  std::uint64_t seed = 0;
  std::vector<nn::Param> params;
};

void save_checkpoint(const std::filesystem::path& path, const DiscrepancyModel& model,
                     const std::optional<TrainConfig>& train, std::uint64_t seed);
Checkpoint read_checkpoint(const std::filesystem::path& path);
DiscrepancyModel load_model(const std::filesystem::path& path);

// Full-size frame the schedule crops from.
struct TrainingFrame {
  RgbImage image;      // obstacles pasted, not augmented
  RgbImage inpainted;
  Mask labels;
  Mask roi;
};

using FrameLoader = std::function<TrainingFrame(const std::string& frame_id)>;

// Crop + augmentation for one schedule entry; deterministic in entry.sample_seed.
TrainingSample make_training_sample(const TrainingFrame& frame, const ScheduleEntry& entry,
                                    CropSize crop, const TrainConfig& config);
// Test-time preparation: blur of the original stream only.
TrainingSample make_eval_sample(const TrainingFrame& frame, const TrainConfig& config);

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainOutputs {
  std::filesystem::path checkpoint;  // written at every new best validation loss
  std::filesystem::path history_csv;
};

struct TrainResult {
  std::vector<HistoryRow> history;
  int best_epoch = 0;
  double best_val_loss = 0;
};

// Adam with plateau learning-rate decay over the fixed schedule. Epoch e uses
// plan.epochs[e % plan.epochs.size()].
TrainResult train(DiscrepancyModel& model, const EpochPlan& plan, const FrameLoader& loader,
                  std::span<const TrainingSample> validation, const TrainConfig& config,
                  const TrainOutputs& outputs,
                  const std::function<void(const HistoryRow&)>& on_epoch = {});

}  // namespace roaderaser

#endif  // ROADERASER_DISCREPANCY_MODEL_HPP_
