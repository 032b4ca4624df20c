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

#include "roaderaser/discrepancy_model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

namespace roaderaser {

using nn::Tensor;

ModelConfig ModelConfig::small() {
  ModelConfig c;
  c.backbone = {{16}, {32}, {48}, {64}};
  c.fusion_channels = {16, 32, 48, 64};
  c.decoder_channels = {16, 32, 48, 64};
  return c;
}

ModelConfig ModelConfig::medium() {
  ModelConfig c;
  c.backbone = {{16, 16}, {32, 32}, {48}, {64}};
  c.fusion_channels = {16, 32, 48, 64};
  c.decoder_channels = {16, 32, 48, 64};
  return c;
}

ModelConfig ModelConfig::vgg16() {
  ModelConfig c;
  c.backbone = {{64, 64}, {128, 128}, {256, 256, 256}, {512, 512, 512}};
  c.fusion_channels = {64, 128, 256, 512};
  c.decoder_channels = {32, 64, 128, 256};
  return c;
}

void ModelConfig::validate() const {
  if (levels() < 2) throw ModelConfigError("model needs at least 2 pyramid levels");
  if (static_cast<int>(fusion_channels.size()) != levels() ||
      static_cast<int>(decoder_channels.size()) != levels()) {
    throw ModelConfigError(fmt::format(
        "channel plan lists {} backbone levels but {} fusion and {} decoder entries",
        levels(), fusion_channels.size(), decoder_channels.size()));
  }
  for (int k = 0; k < levels(); ++k) {
    if (backbone[k].empty()) {
      throw ModelConfigError(fmt::format("level {}: backbone level has no convolutions", k + 1));
    }
    for (int ch : backbone[k]) {
      if (ch <= 0) throw ModelConfigError(fmt::format("level {}: non-positive backbone width", k + 1));
    }
    if (fusion_channels[k] <= 0) {
      throw ModelConfigError(fmt::format("level {}: non-positive fusion width", k + 1));
    }
    if (decoder_channels[k] <= 0) {
      throw ModelConfigError(fmt::format("level {}: non-positive decoder width", k + 1));
    }
  }
  if (pretrained_backbone && backbone_weights.empty()) {
    throw ModelConfigError("pretrained backbone requested without a weights file");
  }
}

nlohmann::json ModelConfig::to_json() const {
  return {{"backbone", backbone},
          {"fusion_channels", fusion_channels},
          {"decoder_channels", decoder_channels},
          {"pretrained_backbone", pretrained_backbone},
          {"backbone_weights", backbone_weights}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.backbone = j.at("backbone").get<std::vector<std::vector<int>>>();
  c.fusion_channels = j.at("fusion_channels").get<std::vector<int>>();
  c.decoder_channels = j.at("decoder_channels").get<std::vector<int>>();
  c.pretrained_backbone = j.value("pretrained_backbone", false);
  c.backbone_weights = j.value("backbone_weights", std::string{});
  return c;
}

void TrainConfig::validate() const {
  if (epochs <= 0 || learning_rate <= 0 || plateau_patience <= 0 || pos_weight <= 0 ||
      batch_size <= 0 || crop.width <= 0 || crop.height <= 0 || jobs <= 0) {
    throw std::invalid_argument("training config: all sizes and rates must be positive");
  }
  if (!(plateau_factor > 0 && plateau_factor < 1)) {
    throw std::invalid_argument("training config: plateau factor must be in (0, 1)");
  }
}

nlohmann::json TrainConfig::to_json() const {
  return {{"epochs", epochs},
          {"learning_rate", learning_rate},
          {"plateau_patience", plateau_patience},
          {"plateau_factor", plateau_factor},
          {"pos_weight", pos_weight},
          {"crop_width", crop.width},
          {"crop_height", crop.height},
          {"batch_size", batch_size},
          {"seed", seed},
          {"blur", augment.blur},
          {"blur_sigma", augment.blur_sigma},
          {"noise", augment.noise},
          {"noise_fine_amplitude", augment.fine.amplitude},
          {"noise_fine_cell", augment.fine.cell_size},
          {"noise_coarse_amplitude", augment.coarse.amplitude},
          {"noise_coarse_cell", augment.coarse.cell_size},
          {"two_copies", two_copies}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.epochs = j.at("epochs").get<int>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.plateau_patience = j.at("plateau_patience").get<int>();
  c.plateau_factor = j.at("plateau_factor").get<double>();
  c.pos_weight = j.at("pos_weight").get<double>();
  c.crop = {j.at("crop_width").get<int>(), j.at("crop_height").get<int>()};
  c.batch_size = j.at("batch_size").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.augment.blur = j.at("blur").get<bool>();
  c.augment.blur_sigma = j.at("blur_sigma").get<double>();
  c.augment.noise = j.at("noise").get<bool>();
  c.augment.fine = {j.at("noise_fine_amplitude").get<double>(), j.at("noise_fine_cell").get<int>()};
  c.augment.coarse = {j.at("noise_coarse_amplitude").get<double>(),
                      j.at("noise_coarse_cell").get<int>()};
  c.two_copies = j.at("two_copies").get<bool>();
  return c;
}

BceResult weighted_bce(std::span<const double> pred, std::span<const std::uint8_t> target,
                       std::span<const std::uint8_t> roi, double pos_weight) {
  if (pred.size() != target.size() || (!roi.empty() && roi.size() != pred.size())) {
    throw std::invalid_argument("weighted_bce: size mismatch");
  }
  BceResult r;
  r.grad.assign(pred.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (target[i] == kIgnoreLabel || (!roi.empty() && roi[i] == 0)) continue;
    const double p = std::clamp(pred[i], kBceEps, 1.0 - kBceEps);
    const bool positive = target[i] != 0;
    const double w = positive ? pos_weight : 1.0;
    total += positive ? -w * std::log(p) : -std::log(1.0 - p);
    r.grad[i] = positive ? -w / p : 1.0 / (1.0 - p);
    r.weight_sum += w;
    ++r.valid_pixels;
  }
  if (r.valid_pixels == 0) {
    r.no_valid_pixels = true;
    return r;
  }
  r.loss = total / r.weight_sum;
  for (double& g : r.grad) g /= r.weight_sum;
  return r;
}

// ---------------------------------------------------------------------------

struct DiscrepancyModel::Trace {
  struct Stream {
    std::vector<std::vector<Tensor>> inputs;   // per level, per conv
    std::vector<std::vector<Tensor>> outputs;  // post-ReLU
    std::vector<std::vector<std::uint32_t>> argmax;
    std::vector<Tensor> taps;
  };
  Stream streams[2];
  std::vector<Tensor> fusion_in;
  std::vector<Tensor> fused;
  std::vector<Tensor> up_in, up_pre, dec_in, dec_pre, dec_out;
  Tensor logits;
};

namespace {

Tensor to_tensor(const RgbImage& img, int height, int width) {
  // Reflect-pads up to (height, width).
  const auto reflect = [](int v, int n) {
    if (n == 1) return 0;
    const int period = 2 * (n - 1);
    v %= period;
    return v < n ? v : period - v;
  };
  Tensor t(3, height, width);
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < height; ++y) {
      const int sy = reflect(y, img.height());
      for (int x = 0; x < width; ++x) t.at(c, y, x) = img.at(reflect(x, img.width()), sy, c);
    }
  }
  return t;
}

int round_up(int v, int multiple) { return (v + multiple - 1) / multiple * multiple; }

double obstacle_probability(const Tensor& logits, std::size_t p) {
  const double z0 = logits.data[p], z1 = logits.data[logits.plane() + p];
  return 1.0 / (1.0 + std::exp(z0 - z1));
}

std::span<const float> cspan(const nn::Param& p) { return p.value; }

}  // namespace

nn::Param& DiscrepancyModel::add_param(std::string name, std::vector<int> shape) {
  std::size_t n = 1;
  for (int s : shape) n *= static_cast<std::size_t>(s);
  params_.push_back({std::move(name), std::move(shape), std::vector<float>(n, 0.0f)});
  return params_.back();
}

DiscrepancyModel::DiscrepancyModel(ModelConfig config, std::uint64_t seed)
    : config_(std::move(config)) {
  config_.validate();
  std::mt19937_64 rng(seed);
  const auto init = [&](nn::Param& p, double stddev) {
    std::normal_distribution<float> normal(0.0f, static_cast<float>(stddev));
    for (float& v : p.value) v = normal(rng);
  };
  const int L = config_.levels();

  int in = 3;
  for (int k = 0; k < L; ++k) {
    for (std::size_t j = 0; j < config_.backbone[k].size(); ++j) {
      const int out = config_.backbone[k][j];
      backbone_idx_.push_back(params_.size());
      init(add_param(fmt::format("backbone.l{}.conv{}.weight", k + 1, j + 1), {out, in, 3, 3}),
           std::sqrt(2.0 / (in * 9)));
      add_param(fmt::format("backbone.l{}.conv{}.bias", k + 1, j + 1), {out});
      in = out;
    }
  }
  for (int k = 0; k < L; ++k) {
    const int c = config_.backbone[k].back();
    fusion_idx_.push_back(params_.size());
    init(add_param(fmt::format("fusion.l{}.weight", k + 1), {config_.fusion_channels[k], 2 * c, 1, 1}),
         std::sqrt(1.0 / (2 * c)));
    add_param(fmt::format("fusion.l{}.bias", k + 1), {config_.fusion_channels[k]});
  }
  // Decoder steps run from the deepest level to full resolution.
  up_idx_.assign(L, 0);
  dec_idx_.assign(L, 0);
  for (int k = L - 1; k >= 0; --k) {
    const int up_in = (k == L - 1) ? config_.fusion_channels[L - 1] + 1 : config_.decoder_channels[k + 1];
    const int d = config_.decoder_channels[k];
    up_idx_[k] = params_.size();
    init(add_param(fmt::format("decoder.l{}.up.weight", k + 1), {up_in, d, 2, 2}),
         std::sqrt(1.0 / up_in));
    add_param(fmt::format("decoder.l{}.up.bias", k + 1), {d});
    const int conv_in = d + (k > 0 ? config_.fusion_channels[k - 1] + 1 : 0);
    dec_idx_[k] = params_.size();
    init(add_param(fmt::format("decoder.l{}.conv.weight", k + 1), {d, conv_in, 3, 3}),
         std::sqrt(1.0 / (conv_in * 9)));
    add_param(fmt::format("decoder.l{}.conv.bias", k + 1), {d});
  }
  head_idx_ = params_.size();
  init(add_param("head.weight", {2, config_.decoder_channels[0], 1, 1}),
       std::sqrt(1.0 / config_.decoder_channels[0]));
  add_param("head.bias", {2});
}

std::size_t DiscrepancyModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.size();
  return n;
}

Gradients DiscrepancyModel::zero_gradients() const {
  Gradients g;
  g.reserve(params_.size());
  for (const auto& p : params_) g.emplace_back(p.size(), 0.0f);
  return g;
}

void DiscrepancyModel::run(const RgbImage& a, const RgbImage& b, Trace& t) const {
  const int L = config_.levels();
  const int height = round_up(a.height(), config_.size_multiple());
  const int width = round_up(a.width(), config_.size_multiple());
  const RgbImage* inputs[2] = {&a, &b};
  for (int s = 0; s < 2; ++s) {
    auto& st = t.streams[s];
    st.inputs.assign(L, {});
    st.outputs.assign(L, {});
    st.argmax.assign(L, {});
    st.taps.assign(L, {});
    Tensor x = to_tensor(*inputs[s], height, width);
    std::size_t conv = 0;
    for (int k = 0; k < L; ++k) {
      for (std::size_t j = 0; j < config_.backbone[k].size(); ++j, ++conv) {
        const std::size_t idx = backbone_idx_[conv];
        st.inputs[k].push_back(std::move(x));
        x = nn::relu(nn::conv2d(st.inputs[k].back(), cspan(params_[idx]), cspan(params_[idx + 1]),
                                config_.backbone[k][j], 3));
        st.outputs[k].push_back(x);
      }
      x = nn::maxpool2x2(x, st.argmax[k]);
      st.taps[k] = x;
    }
  }
  t.fusion_in.assign(L, {});
  t.fused.assign(L, {});
  for (int k = 0; k < L; ++k) {
    const Tensor& ta = t.streams[0].taps[k];
    const Tensor& tb = t.streams[1].taps[k];
    t.fusion_in[k] = nn::concat_channels(ta, tb);
    const std::size_t idx = fusion_idx_[k];
    const Tensor proj = nn::conv2d(t.fusion_in[k], cspan(params_[idx]), cspan(params_[idx + 1]),
                                   config_.fusion_channels[k], 1);
    t.fused[k] = nn::concat_channels(proj, nn::pointwise_correlation(ta, tb));
  }
  t.up_in.assign(L, {});
  t.up_pre.assign(L, {});
  t.dec_in.assign(L, {});
  t.dec_pre.assign(L, {});
  t.dec_out.assign(L, {});
  for (int k = L - 1; k >= 0; --k) {
    t.up_in[k] = (k == L - 1) ? t.fused[L - 1] : t.dec_out[k + 1];
    const std::size_t ui = up_idx_[k], di = dec_idx_[k];
    t.up_pre[k] = nn::upconv2x2(t.up_in[k], cspan(params_[ui]), cspan(params_[ui + 1]),
                                config_.decoder_channels[k]);
    Tensor up = nn::selu(t.up_pre[k]);
    t.dec_in[k] = k > 0 ? nn::concat_channels(up, t.fused[k - 1]) : std::move(up);
    t.dec_pre[k] = nn::conv2d(t.dec_in[k], cspan(params_[di]), cspan(params_[di + 1]),
                              config_.decoder_channels[k], 3);
    t.dec_out[k] = nn::selu(t.dec_pre[k]);
  }
  t.logits = nn::conv2d(t.dec_out[0], cspan(params_[head_idx_]), cspan(params_[head_idx_ + 1]), 2, 1);
}

void DiscrepancyModel::backward(Trace& t, const Tensor& dlogits, Gradients& g, double) const {
  const int L = config_.levels();
  Tensor d = nn::conv2d_backward(t.dec_out[0], dlogits, cspan(params_[head_idx_]), 1,
                                 g[head_idx_], g[head_idx_ + 1]);
  std::vector<Tensor> dfused(L);
  for (int k = 0; k < L; ++k) {
    const std::size_t ui = up_idx_[k], di = dec_idx_[k];
    const Tensor dpre = nn::selu_backward(t.dec_pre[k], d);
    const Tensor din = nn::conv2d_backward(t.dec_in[k], dpre, cspan(params_[di]), 3, g[di], g[di + 1]);
    Tensor dup;
    if (k > 0) {
      nn::split_channels(din, config_.decoder_channels[k], dup, dfused[k - 1]);
    } else {
      dup = din;
    }
    const Tensor duppre = nn::selu_backward(t.up_pre[k], dup);
    d = nn::upconv2x2_backward(t.up_in[k], duppre, cspan(params_[ui]), g[ui], g[ui + 1]);
  }
  dfused[L - 1] = std::move(d);

  std::vector<Tensor> dtap[2];
  dtap[0].resize(L);
  dtap[1].resize(L);
  for (int k = 0; k < L; ++k) {
    Tensor dproj, dcorr;
    nn::split_channels(dfused[k], config_.fusion_channels[k], dproj, dcorr);
    const std::size_t idx = fusion_idx_[k];
    const Tensor dcat = nn::conv2d_backward(t.fusion_in[k], dproj, cspan(params_[idx]), 1,
                                            g[idx], g[idx + 1]);
    nn::split_channels(dcat, t.streams[0].taps[k].channels, dtap[0][k], dtap[1][k]);
    Tensor da, db;
    nn::pointwise_correlation_backward(t.streams[0].taps[k], t.streams[1].taps[k], dcorr, da, db);
    nn::add_inplace(dtap[0][k], da);
    nn::add_inplace(dtap[1][k], db);
  }

  for (int s = 0; s < 2; ++s) {
    auto& st = t.streams[s];
    std::size_t conv = backbone_idx_.size();
    for (int k = L - 1; k >= 0; --k) {
      Tensor dx = nn::maxpool2x2_backward(st.outputs[k].back(), dtap[s][k], st.argmax[k]);
      for (int j = static_cast<int>(config_.backbone[k].size()) - 1; j >= 0; --j) {
        const std::size_t idx = backbone_idx_[--conv];
        const Tensor dpre = nn::relu_backward(st.outputs[k][j], dx);
        const bool first = (k == 0 && j == 0);
        dx = nn::conv2d_backward(st.inputs[k][j], dpre, cspan(params_[idx]), 3, g[idx], g[idx + 1],
                                 !first);
      }
      if (k > 0) nn::add_inplace(dtap[s][k - 1], dx);
    }
  }
}

Heatmap DiscrepancyModel::forward(const RgbImage& original_blurred, const RgbImage& inpainted,
                                  const Mask& roi) const {
  if (!original_blurred.same_shape(inpainted) || !original_blurred.same_shape(roi) ||
      original_blurred.channels() != 3 || inpainted.channels() != 3) {
    throw std::invalid_argument("forward: input dimensions differ");
  }
  Heatmap out = make_heatmap(roi.width(), roi.height());
  if (roi.empty() || count_nonzero(roi) == 0) return out;
  Trace t;
  run(original_blurred, inpainted, t);
  for (int y = 0; y < roi.height(); ++y) {
    for (int x = 0; x < roi.width(); ++x) {
      if (!roi.at(x, y)) continue;
      const std::size_t p = static_cast<std::size_t>(y) * t.logits.width + x;
      out.at(x, y) = static_cast<float>(obstacle_probability(t.logits, p));
    }
  }
  return out;
}

namespace {

// Probabilities and padded targets over the padded grid of `logits`.
void padded_targets(const Tensor& logits, const TrainingSample& s, std::vector<double>& prob,
                    std::vector<std::uint8_t>& target, std::vector<std::uint8_t>& roi) {
  const std::size_t n = logits.plane();
  prob.assign(n, 0.0);
  target.assign(n, kIgnoreLabel);
  roi.assign(n, 0);
  for (std::size_t p = 0; p < n; ++p) prob[p] = obstacle_probability(logits, p);
  for (int y = 0; y < s.labels.height(); ++y) {
    for (int x = 0; x < s.labels.width(); ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * logits.width + x;
      target[p] = s.labels.at(x, y);
      roi[p] = s.roi.at(x, y);
    }
  }
}

void check_sample(const TrainingSample& s) {
  if (!s.image.same_shape(s.inpainted) || !s.image.same_shape(s.labels) ||
      !s.image.same_shape(s.roi)) {
    throw std::invalid_argument("training sample: dimensions differ");
  }
}

}  // namespace

BceResult DiscrepancyModel::loss(const TrainingSample& sample, double pos_weight) const {
  check_sample(sample);
  Trace t;
  run(sample.image, sample.inpainted, t);
  std::vector<double> prob;
  std::vector<std::uint8_t> target, roi;
  padded_targets(t.logits, sample, prob, target, roi);
  BceResult r = weighted_bce(prob, target, roi, pos_weight);
  r.grad.clear();
  return r;
}

BceResult DiscrepancyModel::accumulate_gradients(const TrainingSample& sample, double pos_weight,
                                                 double scale, Gradients& grads) const {
  check_sample(sample);
  Trace t;
  run(sample.image, sample.inpainted, t);
  std::vector<double> prob;
  std::vector<std::uint8_t> target, roi;
  padded_targets(t.logits, sample, prob, target, roi);
  BceResult r = weighted_bce(prob, target, roi, pos_weight);
  if (r.no_valid_pixels) return r;
  Tensor dlogits(2, t.logits.height, t.logits.width);
  const std::size_t n = t.logits.plane();
  for (std::size_t p = 0; p < n; ++p) {
    if (r.grad[p] == 0.0) continue;
    const double dz = scale * r.grad[p] * prob[p] * (1.0 - prob[p]);
    dlogits.data[n + p] = static_cast<float>(dz);
    dlogits.data[p] = static_cast<float>(-dz);
  }
  backward(t, dlogits, grads, scale);
  r.grad.clear();
  return r;
}

}  // namespace roaderaser
