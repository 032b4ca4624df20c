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

// Minimal CHW tensor kernels with explicit backward passes. Every backward
// function accumulates (+=) into parameter gradients and returns the
// gradient with respect to its input.

#ifndef ROADERASER_NN_LAYERS_HPP_
#define ROADERASER_NN_LAYERS_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace roaderaser::nn {

struct Tensor {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> data;

  Tensor() = default;
  Tensor(int c, int h, int w, float fill = 0.0f)
      : channels(c), height(h), width(w),
        data(static_cast<std::size_t>(c) * h * w, fill) {}

  std::size_t plane() const { return static_cast<std::size_t>(height) * width; }
  float& at(int c, int y, int x) { return data[c * plane() + static_cast<std::size_t>(y) * width + x]; }
  float at(int c, int y, int x) const { return data[c * plane() + static_cast<std::size_t>(y) * width + x]; }
  bool same_shape(const Tensor& o) const {
    return channels == o.channels && height == o.height && width == o.width;
  }
};

// Learnable tensor. `shape` is informational (e.g. {out, in, k, k}).
struct Param {
  std::string name;
  std::vector<int> shape;
  std::vector<float> value;

  std::size_t size() const { return value.size(); }
};

// Square convolution, stride 1, zero padding k/2. weight: out x in x k x k.
Tensor conv2d(const Tensor& x, std::span<const float> weight, std::span<const float> bias,
              int out_channels, int kernel);
// Returns dx unless `need_dx` is false (then an empty tensor).
Tensor conv2d_backward(const Tensor& x, const Tensor& dy, std::span<const float> weight,
                       int kernel, std::span<float> dweight, std::span<float> dbias,
                       bool need_dx = true);

// Transposed convolution, kernel 2, stride 2. weight: in x out x 2 x 2.
Tensor upconv2x2(const Tensor& x, std::span<const float> weight, std::span<const float> bias,
                 int out_channels);
Tensor upconv2x2_backward(const Tensor& x, const Tensor& dy, std::span<const float> weight,
                          std::span<float> dweight, std::span<float> dbias);

// 2x2 max pooling with stride 2; dims must be even. `argmax` records the
// winning input offset for the backward pass.
Tensor maxpool2x2(const Tensor& x, std::vector<std::uint32_t>& argmax);
Tensor maxpool2x2_backward(const Tensor& x, const Tensor& dy,
                           const std::vector<std::uint32_t>& argmax);

Tensor relu(const Tensor& x);
Tensor relu_backward(const Tensor& y, const Tensor& dy);  // y = relu output

inline constexpr float kSeluLambda = 1.0507009873554805f;
inline constexpr float kSeluAlpha = 1.6732632423543772f;
Tensor selu(const Tensor& x);
Tensor selu_backward(const Tensor& x, const Tensor& dy);  // x = selu input

inline constexpr double kCorrelationEps = 1e-8;
// Per-location normalized inner product over channels, <a,b>/(|a||b| + eps).
Tensor pointwise_correlation(const Tensor& a, const Tensor& b);
void pointwise_correlation_backward(const Tensor& a, const Tensor& b, const Tensor& dy,
                                    Tensor& da, Tensor& db);

Tensor concat_channels(const Tensor& a, const Tensor& b);
// Splits dy of a concatenation into the parts for its first `channels_a`
// channels and the rest.
void split_channels(const Tensor& dy, int channels_a, Tensor& da, Tensor& db);

void add_inplace(Tensor& acc, const Tensor& x);

}  // namespace roaderaser::nn

#endif  // ROADERASER_NN_LAYERS_HPP_
