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

#include "roaderaser/nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Core>

namespace roaderaser::nn {
namespace {

using RowMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;

// (C*k*k) x (H*W) patch matrix for a stride-1, zero-padded convolution.
RowMatrix im2col(const Tensor& x, int k) {
  const int pad = k / 2;
  const int hw = x.height * x.width;
  RowMatrix cols(static_cast<Eigen::Index>(x.channels) * k * k, hw);
  for (int c = 0; c < x.channels; ++c) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        float* row = cols.row((c * k + ky) * k + kx).data();
        for (int y = 0; y < x.height; ++y) {
          const int sy = y + ky - pad;
          float* out = row + static_cast<std::size_t>(y) * x.width;
          if (sy < 0 || sy >= x.height) {
            std::fill(out, out + x.width, 0.0f);
            continue;
          }
          for (int xx = 0; xx < x.width; ++xx) {
            const int sx = xx + kx - pad;
            out[xx] = (sx < 0 || sx >= x.width) ? 0.0f : x.at(c, sy, sx);
          }
        }
      }
    }
  }
  return cols;
}

void col2im(const RowMatrix& cols, int k, Tensor& dx) {
  const int pad = k / 2;
  for (int c = 0; c < dx.channels; ++c) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const float* row = cols.row((c * k + ky) * k + kx).data();
        for (int y = 0; y < dx.height; ++y) {
          const int sy = y + ky - pad;
          if (sy < 0 || sy >= dx.height) continue;
          const float* in = row + static_cast<std::size_t>(y) * dx.width;
          for (int xx = 0; xx < dx.width; ++xx) {
            const int sx = xx + kx - pad;
            if (sx >= 0 && sx < dx.width) dx.at(c, sy, sx) += in[xx];
          }
        }
      }
    }
  }
}

// Eigen picks its vectorization path from pointer alignment, which changes
// the floating-point summation order. Products therefore run on Eigen-owned
// (aligned) copies so results do not depend on where the inputs live.
RowMatrix owned(const float* data, Eigen::Index rows, Eigen::Index cols) {
  return ConstMap(data, rows, cols);
}

void store(const RowMatrix& m, float* out) { std::copy(m.data(), m.data() + m.size(), out); }

void accumulate(const RowMatrix& m, std::span<float> out) {
  for (Eigen::Index i = 0; i < m.size(); ++i) out[i] += m.data()[i];
}

void check(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

Tensor conv2d(const Tensor& x, std::span<const float> weight, std::span<const float> bias,
              int out_channels, int kernel) {
  const std::size_t fan = static_cast<std::size_t>(x.channels) * kernel * kernel;
  check(weight.size() == fan * out_channels && bias.size() == static_cast<std::size_t>(out_channels),
        "conv2d: parameter size mismatch");
  Tensor y(out_channels, x.height, x.width);
  const int hw = x.height * x.width;
  const RowMatrix w = owned(weight.data(), out_channels, static_cast<Eigen::Index>(fan));
  RowMatrix out = kernel == 1 ? RowMatrix(w * owned(x.data.data(), x.channels, hw))
                              : RowMatrix(w * im2col(x, kernel));
  for (int o = 0; o < out_channels; ++o) out.row(o).array() += bias[o];
  store(out, y.data.data());
  return y;
}

Tensor conv2d_backward(const Tensor& x, const Tensor& dy, std::span<const float> weight,
                       int kernel, std::span<float> dweight, std::span<float> dbias,
                       bool need_dx) {
  const int out_channels = dy.channels;
  const std::size_t fan = static_cast<std::size_t>(x.channels) * kernel * kernel;
  check(dweight.size() == fan * out_channels && weight.size() == dweight.size(),
        "conv2d_backward: parameter size mismatch");
  const int hw = x.height * x.width;
  const RowMatrix g = owned(dy.data.data(), out_channels, hw);
  const RowMatrix w = owned(weight.data(), out_channels, static_cast<Eigen::Index>(fan));
  for (int o = 0; o < out_channels; ++o) dbias[o] += g.row(o).sum();

  if (kernel == 1) {
    const RowMatrix xm = owned(x.data.data(), x.channels, hw);
    accumulate(g * xm.transpose(), dweight);
    if (!need_dx) return {};
    Tensor dx(x.channels, x.height, x.width);
    store(w.transpose() * g, dx.data.data());
    return dx;
  }
  const RowMatrix cols = im2col(x, kernel);
  accumulate(g * cols.transpose(), dweight);
  if (!need_dx) return {};
  const RowMatrix dcols = w.transpose() * g;
  Tensor dx(x.channels, x.height, x.width);
  col2im(dcols, kernel, dx);
  return dx;
}

Tensor upconv2x2(const Tensor& x, std::span<const float> weight, std::span<const float> bias,
                 int out_channels) {
  check(weight.size() == static_cast<std::size_t>(x.channels) * out_channels * 4 &&
            bias.size() == static_cast<std::size_t>(out_channels),
        "upconv2x2: parameter size mismatch");
  const int hw = x.height * x.width;
  // weight viewed as C x (O*4); columns = Wᵀ x has (O*4) x HW.
  const RowMatrix w = owned(weight.data(), x.channels, out_channels * 4);
  const RowMatrix cols = w.transpose() * owned(x.data.data(), x.channels, hw);
  Tensor y(out_channels, x.height * 2, x.width * 2);
  for (int o = 0; o < out_channels; ++o) {
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        const float* row = cols.row(o * 4 + a * 2 + b).data();
        for (int i = 0; i < x.height; ++i) {
          for (int j = 0; j < x.width; ++j) {
            y.at(o, 2 * i + a, 2 * j + b) = row[i * x.width + j] + bias[o];
          }
        }
      }
    }
  }
  return y;
}

Tensor upconv2x2_backward(const Tensor& x, const Tensor& dy, std::span<const float> weight,
                          std::span<float> dweight, std::span<float> dbias) {
  const int out_channels = dy.channels;
  const int hw = x.height * x.width;
  RowMatrix gcols(out_channels * 4, hw);
  for (int o = 0; o < out_channels; ++o) {
    double bsum = 0;
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        float* row = gcols.row(o * 4 + a * 2 + b).data();
        for (int i = 0; i < x.height; ++i) {
          for (int j = 0; j < x.width; ++j) {
            const float g = dy.at(o, 2 * i + a, 2 * j + b);
            row[i * x.width + j] = g;
            bsum += g;
          }
        }
      }
    }
    dbias[o] += static_cast<float>(bsum);
  }
  const RowMatrix xm = owned(x.data.data(), x.channels, hw);
  accumulate(xm * gcols.transpose(), dweight);
  const RowMatrix w = owned(weight.data(), x.channels, out_channels * 4);
  Tensor dx(x.channels, x.height, x.width);
  store(w * gcols, dx.data.data());
  return dx;
}

Tensor maxpool2x2(const Tensor& x, std::vector<std::uint32_t>& argmax) {
  check(x.height % 2 == 0 && x.width % 2 == 0, "maxpool2x2: odd spatial size");
  Tensor y(x.channels, x.height / 2, x.width / 2);
  argmax.assign(y.data.size(), 0);
  std::size_t k = 0;
  for (int c = 0; c < x.channels; ++c) {
    for (int i = 0; i < y.height; ++i) {
      for (int j = 0; j < y.width; ++j, ++k) {
        float best = x.at(c, 2 * i, 2 * j);
        std::uint32_t arg = 0;
        for (std::uint32_t d = 1; d < 4; ++d) {
          const float v = x.at(c, 2 * i + static_cast<int>(d / 2), 2 * j + static_cast<int>(d % 2));
          if (v > best) {
            best = v;
            arg = d;
          }
        }
        y.data[k] = best;
        argmax[k] = arg;
      }
    }
  }
  return y;
}

Tensor maxpool2x2_backward(const Tensor& x, const Tensor& dy,
                           const std::vector<std::uint32_t>& argmax) {
  Tensor dx(x.channels, x.height, x.width);
  std::size_t k = 0;
  for (int c = 0; c < dy.channels; ++c) {
    for (int i = 0; i < dy.height; ++i) {
      for (int j = 0; j < dy.width; ++j, ++k) {
        const std::uint32_t d = argmax[k];
        dx.at(c, 2 * i + static_cast<int>(d / 2), 2 * j + static_cast<int>(d % 2)) += dy.data[k];
      }
    }
  }
  return dx;
}

Tensor relu(const Tensor& x) {
  Tensor y = x;
  for (float& v : y.data) v = std::max(v, 0.0f);
  return y;
}

Tensor relu_backward(const Tensor& y, const Tensor& dy) {
  Tensor dx = dy;
  for (std::size_t i = 0; i < dx.data.size(); ++i) {
    if (y.data[i] <= 0.0f) dx.data[i] = 0.0f;
  }
  return dx;
}

Tensor selu(const Tensor& x) {
  Tensor y = x;
  for (float& v : y.data) {
    v = v > 0.0f ? kSeluLambda * v : kSeluLambda * kSeluAlpha * std::expm1(v);
  }
  return y;
}

Tensor selu_backward(const Tensor& x, const Tensor& dy) {
  Tensor dx = dy;
  for (std::size_t i = 0; i < dx.data.size(); ++i) {
    const float v = x.data[i];
    dx.data[i] *= v > 0.0f ? kSeluLambda : kSeluLambda * kSeluAlpha * std::exp(v);
  }
  return dx;
}

Tensor pointwise_correlation(const Tensor& a, const Tensor& b) {
  check(a.same_shape(b), "pointwise_correlation: shape mismatch");
  Tensor y(1, a.height, a.width);
  const std::size_t n = a.plane();
  for (std::size_t p = 0; p < n; ++p) {
    double dot = 0, na = 0, nb = 0;
    for (int c = 0; c < a.channels; ++c) {
      const double va = a.data[c * n + p], vb = b.data[c * n + p];
      dot += va * vb;
      na += va * va;
      nb += vb * vb;
    }
    y.data[p] = static_cast<float>(dot / (std::sqrt(na) * std::sqrt(nb) + kCorrelationEps));
  }
  return y;
}

void pointwise_correlation_backward(const Tensor& a, const Tensor& b, const Tensor& dy,
                                    Tensor& da, Tensor& db) {
  da = Tensor(a.channels, a.height, a.width);
  db = Tensor(b.channels, b.height, b.width);
  const std::size_t n = a.plane();
  for (std::size_t p = 0; p < n; ++p) {
    double dot = 0, na2 = 0, nb2 = 0;
    for (int c = 0; c < a.channels; ++c) {
      const double va = a.data[c * n + p], vb = b.data[c * n + p];
      dot += va * vb;
      na2 += va * va;
      nb2 += vb * vb;
    }
    const double na = std::sqrt(na2), nb = std::sqrt(nb2);
    // The map is not differentiable where either feature vector vanishes.
    if (na < 1e-6 || nb < 1e-6) continue;
    const double denom = na * nb + kCorrelationEps;
    const double g = dy.data[p];
    for (int c = 0; c < a.channels; ++c) {
      const double va = a.data[c * n + p], vb = b.data[c * n + p];
      da.data[c * n + p] = static_cast<float>(g * (vb / denom - dot * nb * va / (na * denom * denom)));
      db.data[c * n + p] = static_cast<float>(g * (va / denom - dot * na * vb / (nb * denom * denom)));
    }
  }
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  check(a.height == b.height && a.width == b.width, "concat_channels: spatial mismatch");
  Tensor y(a.channels + b.channels, a.height, a.width);
  std::copy(a.data.begin(), a.data.end(), y.data.begin());
  std::copy(b.data.begin(), b.data.end(), y.data.begin() + static_cast<std::ptrdiff_t>(a.data.size()));
  return y;
}

void split_channels(const Tensor& dy, int channels_a, Tensor& da, Tensor& db) {
  da = Tensor(channels_a, dy.height, dy.width);
  db = Tensor(dy.channels - channels_a, dy.height, dy.width);
  std::copy(dy.data.begin(), dy.data.begin() + static_cast<std::ptrdiff_t>(da.data.size()),
            da.data.begin());
  std::copy(dy.data.begin() + static_cast<std::ptrdiff_t>(da.data.size()), dy.data.end(),
            db.data.begin());
}

void add_inplace(Tensor& acc, const Tensor& x) {
  check(acc.same_shape(x), "add_inplace: shape mismatch");
  for (std::size_t i = 0; i < acc.data.size(); ++i) acc.data[i] += x.data[i];
}

}  // namespace roaderaser::nn
