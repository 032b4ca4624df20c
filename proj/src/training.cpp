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

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include <fmt/format.h>
#include <fmt/os.h>
#include <spdlog/spdlog.h>

#include "roaderaser/discrepancy_model.hpp"
#include "roaderaser/parallel.hpp"

namespace roaderaser {

namespace {

constexpr char kCheckpointMagic[8] = {'R', 'D', 'X', 'C', 'K', 'P', 'T', '1'};

}  // namespace

DiscrepancyModel build_model(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  DiscrepancyModel model(config, seed);
  if (!config.pretrained_backbone) return model;
  const Checkpoint source = read_checkpoint(config.backbone_weights);
  std::size_t loaded = 0;
  for (auto& p : model.params()) {
    if (!p.name.starts_with("backbone.")) continue;
    const auto it = std::find_if(source.params.begin(), source.params.end(),
                                 [&](const nn::Param& q) { return q.name == p.name; });
    if (it == source.params.end() || it->shape != p.shape) {
      throw ModelConfigError(fmt::format("backbone weights: missing or mis-shaped tensor {}", p.name));
    }
    p.value = it->value;
    ++loaded;
  }
  spdlog::info("loaded {} backbone tensors from {}", loaded, config.backbone_weights);
  return model;
}

Adam::Adam(const std::vector<nn::Param>& params, double beta1, double beta2, double eps)
    : beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (const auto& p : params) {
    m_.emplace_back(p.size(), 0.0f);
    v_.emplace_back(p.size(), 0.0f);
  }
}

void Adam::step(std::vector<nn::Param>& params, const Gradients& grads, double lr) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw std::invalid_argument("Adam::step: parameter layout changed");
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& value = params[i].value;
    for (std::size_t j = 0; j < value.size(); ++j) {
      const double g = grads[i][j];
      const double m = beta1_ * m_[i][j] + (1.0 - beta1_) * g;
      const double v = beta2_ * v_[i][j] + (1.0 - beta2_) * g * g;
      m_[i][j] = static_cast<float>(m);
      v_[i][j] = static_cast<float>(v);
      value[j] -= static_cast<float>(lr * (m / c1) / (std::sqrt(v / c2) + eps_));
    }
  }
}

bool PlateauScheduler::step(double val_loss) {
  if (!has_best_ || val_loss < best_) {
    best_ = val_loss;
    has_best_ = true;
    bad_epochs_ = 0;
    return false;
  }
  if (++bad_epochs_ < patience_) return false;
  lr_ *= factor_;
  bad_epochs_ = 0;
  return true;
}

void write_history_csv(const std::filesystem::path& path, std::span<const HistoryRow> rows) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto out = fmt::output_file(path.string());
  out.print("epoch,train_loss,val_loss,lr\n");
  for (const auto& r : rows) {
    out.print("{},{:.9g},{:.9g},{:.9g}\n", r.epoch, r.train_loss, r.val_loss, r.lr);
  }
}

void save_checkpoint(const std::filesystem::path& path, const DiscrepancyModel& model,
                     const std::optional<TrainConfig>& train, std::uint64_t seed) {
  nlohmann::json header;
  header["model"] = model.config().to_json();
  header["train"] = train ? train->to_json() : nlohmann::json(nullptr);
  header["seed"] = seed;
  auto& tensors = header["tensors"] = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& p : model.params()) {
    tensors.push_back({{"name", p.name}, {"shape", p.shape}, {"offset", offset}, {"count", p.size()}});
    offset += p.size();
  }
  const std::string text = header.dump();
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  // Write to a sibling file first so a crash never leaves a truncated checkpoint.
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("cannot write checkpoint {}", path.string()));
    const std::uint32_t version = Checkpoint::kFormatVersion;
    const std::uint64_t length = text.size();
    out.write(kCheckpointMagic, sizeof kCheckpointMagic);
    out.write(reinterpret_cast<const char*>(&version), sizeof version);
    out.write(reinterpret_cast<const char*>(&length), sizeof length);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& p : model.params()) {
      out.write(reinterpret_cast<const char*>(p.value.data()),
                static_cast<std::streamsize>(p.size() * sizeof(float)));
    }
    if (!out) throw std::runtime_error(fmt::format("cannot write checkpoint {}", path.string()));
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open checkpoint {}", path.string()));
  char magic[8];
  std::uint32_t version = 0;
  std::uint64_t length = 0;
  in.read(magic, sizeof magic);
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  in.read(reinterpret_cast<char*>(&length), sizeof length);
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0) {
    throw std::runtime_error(fmt::format("{} is not a checkpoint", path.string()));
  }
  if (version != Checkpoint::kFormatVersion) {
    throw std::runtime_error(fmt::format("{}: unsupported checkpoint version {} (expected {})",
                                         path.string(), version, Checkpoint::kFormatVersion));
  }
  std::string text(length, '\0');
  in.read(text.data(), static_cast<std::streamsize>(length));
  const auto header = nlohmann::json::parse(text);
  Checkpoint ck;
  ck.model = ModelConfig::from_json(header.at("model"));
  if (!header.at("train").is_null()) ck.train = TrainConfig::from_json(header.at("train"));
  ck.seed = header.at("seed").get<std::uint64_t>();
  const auto data_start = in.tellg();
  for (const auto& t : header.at("tensors")) {
    nn::Param p;
    p.name = t.at("name").get<std::string>();
    p.shape = t.at("shape").get<std::vector<int>>();
    p.value.resize(t.at("count").get<std::size_t>());
    in.seekg(data_start + static_cast<std::streamoff>(t.at("offset").get<std::uint64_t>() * sizeof(float)));
    in.read(reinterpret_cast<char*>(p.value.data()),
            static_cast<std::streamsize>(p.value.size() * sizeof(float)));
    if (!in) throw std::runtime_error(fmt::format("{}: truncated tensor {}", path.string(), p.name));
    ck.params.push_back(std::move(p));
  }
  return ck;
}

DiscrepancyModel load_model(const std::filesystem::path& path) {
  Checkpoint ck = read_checkpoint(path);
  DiscrepancyModel model(ck.model, ck.seed);
  auto& params = model.params();
  if (params.size() != ck.params.size()) {
    throw std::runtime_error(fmt::format("{}: tensor count {} does not match the model ({})",
                                         path.string(), ck.params.size(), params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].name != ck.params[i].name || params[i].shape != ck.params[i].shape) {
      throw std::runtime_error(fmt::format("{}: tensor {} does not match the model",
                                           path.string(), ck.params[i].name));
    }
    params[i].value = std::move(ck.params[i].value);
  }
  return model;
}

TrainingSample make_training_sample(const TrainingFrame& frame, const ScheduleEntry& entry,
                                    CropSize crop, const TrainConfig& config) {
  const auto cut = [&](const auto& r) {
    return crop_reflect(r, entry.crop_origin, crop.width, crop.height);
  };
  TrainingSample s;
  const RgbImage original = cut(frame.image);
  Rng rng(entry.sample_seed);
  s.image = augment_high_freq(original, rng, config.augment);
  s.inpainted = config.two_copies ? original : cut(frame.inpainted);
  s.labels = cut(frame.labels);
  s.roi = cut(frame.roi);
  return s;
}

TrainingSample make_eval_sample(const TrainingFrame& frame, const TrainConfig& config) {
  TrainingSample s;
  s.image = config.augment.blur ? gaussian_blur(frame.image, config.augment.blur_sigma)
                                : frame.image;
  s.inpainted = config.two_copies ? frame.image : frame.inpainted;
  s.labels = frame.labels;
  s.roi = frame.roi;
  return s;
}

namespace {

double validation_loss(const DiscrepancyModel& model, std::span<const TrainingSample> samples,
                       const TrainConfig& config) {
  std::vector<BceResult> results(samples.size());
  parallel_for(samples.size(), config.jobs, [&](std::size_t i) {
    results[i] = model.loss(samples[i], config.pos_weight);
  });
  double total = 0.0;
  std::size_t counted = 0;
  for (const auto& r : results) {
    if (r.no_valid_pixels) continue;
    total += r.loss;
    ++counted;
  }
  return counted ? total / counted : 0.0;
}

}  // namespace

TrainResult train(DiscrepancyModel& model, const EpochPlan& plan, const FrameLoader& loader,
                  std::span<const TrainingSample> validation, const TrainConfig& config,
                  const TrainOutputs& outputs,
                  const std::function<void(const HistoryRow&)>& on_epoch) {
  config.validate();
  if (plan.epochs.empty()) throw std::invalid_argument("train: empty epoch plan");
  Adam adam(model.params());
  PlateauScheduler scheduler(config.learning_rate, config.plateau_patience, config.plateau_factor);
  TrainResult result;
  result.best_val_loss = std::numeric_limits<double>::infinity();
  std::size_t batch_id = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = scheduler.lr();
    const auto& entries = plan.epochs[epoch % plan.epochs.size()];
    double loss_sum = 0.0;
    std::size_t loss_count = 0;
    for (std::size_t start = 0; start < entries.size(); start += config.batch_size, ++batch_id) {
      const std::size_t n = std::min<std::size_t>(config.batch_size, entries.size() - start);
      std::vector<Gradients> grads(n);
      std::vector<BceResult> losses(n);
      parallel_for(n, config.jobs, [&](std::size_t i) {
        const ScheduleEntry& entry = entries[start + i];
        const TrainingSample sample =
            make_training_sample(loader(entry.frame_id), entry, plan.crop, config);
        grads[i] = model.zero_gradients();
        losses[i] = model.accumulate_gradients(sample, config.pos_weight, 1.0 / n, grads[i]);
      });
      for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(losses[i].loss)) {
          throw TrainingError(fmt::format("non-finite loss in epoch {} batch {} (frame {})",
                                          epoch + 1, batch_id, entries[start + i].frame_id));
        }
        if (losses[i].no_valid_pixels) continue;
        loss_sum += losses[i].loss;
        ++loss_count;
      }
      // Summed in index order so the update does not depend on thread timing.
      for (std::size_t i = 1; i < n; ++i) {
        for (std::size_t p = 0; p < grads[0].size(); ++p) {
          for (std::size_t j = 0; j < grads[0][p].size(); ++j) grads[0][p][j] += grads[i][p][j];
        }
      }
      adam.step(model.params(), grads[0], lr);
    }

    HistoryRow row;
    row.epoch = epoch + 1;
    row.train_loss = loss_count ? loss_sum / loss_count : 0.0;
    row.val_loss = validation.empty() ? row.train_loss : validation_loss(model, validation, config);
    row.lr = lr;
    if (!std::isfinite(row.val_loss)) {
      throw TrainingError(fmt::format("non-finite validation loss in epoch {}", epoch + 1));
    }
    result.history.push_back(row);
    if (row.val_loss < result.best_val_loss) {
      result.best_val_loss = row.val_loss;
      result.best_epoch = row.epoch;
      if (!outputs.checkpoint.empty()) save_checkpoint(outputs.checkpoint, model, config, config.seed);
    }
    if (!outputs.history_csv.empty()) write_history_csv(outputs.history_csv, result.history);
    if (on_epoch) on_epoch(row);
    if (scheduler.step(row.val_loss)) {
      spdlog::info("epoch {}: learning rate reduced to {:g}", row.epoch, scheduler.lr());
    }
  }
  return result;
}

}  // namespace roaderaser
