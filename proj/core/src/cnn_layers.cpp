/*
 * Copyright 2026 The malvis Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "malvis/cnn_layers.hpp"

#include <algorithm>
#include <limits>

#include "malvis/error.hpp"

namespace malvis::cnn {

namespace {

// Zero-padded copy of every input channel. Rows are (W + 2p) wide and the
// buffer carries 2p slack values so that every tap of a "wide" output row
// (which includes the 2p junk columns on the right) stays in bounds.
struct Padded {
  std::size_t pad;
  std::size_t row;    // padded width
  std::size_t plane;  // per-channel stride
  std::vector<double> data;
};

Padded pad_input(const Tensor& in, std::size_t pad) {
  const Shape& s = in.shape();
  Padded p;
  p.pad = pad;
  p.row = s.width + 2 * pad;
  p.plane = (s.height + 2 * pad) * p.row + 2 * pad;
  p.data.assign(s.channels * p.plane, 0.0);
  for (std::size_t c = 0; c < s.channels; ++c) {
    const auto src = in.channel(c);
    for (std::size_t y = 0; y < s.height; ++y)
      std::copy_n(src.data() + y * s.width, s.width,
                  p.data.data() + c * p.plane + (y + pad) * p.row + pad);
  }
  return p;
}

}  // namespace

// Outputs are computed on rows of the padded width; for output position
// q = y * row + x the tap (ky, kx) reads padded[q + ky * row + kx]. The junk
// columns x >= W are dropped (forward) or held at zero (backward).
void Conv2d::forward(const Tensor& in, std::span<const double> params, Tensor& out) const {
  const Shape& s = in.shape();
  if (s.channels != in_channels) fail("ShapeMismatch", "conv input channel count");
  out.reset({out_channels, s.height, s.width});
  const double* W = params.data() + offset;
  const double* b = W + weight_count();
  const Padded p = pad_input(in, kernel / 2);
  const std::size_t span_len = s.height * p.row;
  std::vector<double> wide(span_len);
  for (std::size_t o = 0; o < out_channels; ++o) {
    std::fill(wide.begin(), wide.end(), b[o]);
    double* acc = wide.data();
    for (std::size_t i = 0; i < in_channels; ++i) {
      const double* src = p.data.data() + i * p.plane;
      const double* w = W + (o * in_channels + i) * kernel * kernel;
      for (std::size_t ky = 0; ky < kernel; ++ky) {
        for (std::size_t kx = 0; kx < kernel; ++kx) {
          const double wv = w[ky * kernel + kx];
          const double* tap = src + ky * p.row + kx;
          for (std::size_t q = 0; q < span_len; ++q) acc[q] += wv * tap[q];
        }
      }
    }
    auto dst = out.channel(o);
    for (std::size_t y = 0; y < s.height; ++y)
      std::copy_n(wide.data() + y * p.row, s.width, dst.data() + y * s.width);
  }
}

void Conv2d::backward(const Tensor& in, const Tensor& grad_out, std::span<const double> params,
                      std::span<double> grad_params, Tensor* grad_in) const {
  const Shape& s = in.shape();
  const double* W = params.data() + offset;
  double* gW = grad_params.data() + offset;
  double* gb = gW + weight_count();
  const Padded p = pad_input(in, kernel / 2);
  const std::size_t span_len = s.height * p.row;
  std::vector<double> grad_pad(grad_in ? in_channels * p.plane : 0, 0.0);
  std::vector<double> wide(span_len, 0.0);
  for (std::size_t o = 0; o < out_channels; ++o) {
    const auto go = grad_out.channel(o);
    double bsum = 0.0;
    for (double v : go) bsum += v;
    gb[o] += bsum;
    for (std::size_t y = 0; y < s.height; ++y)
      std::copy_n(go.data() + y * s.width, s.width, wide.data() + y * p.row);
    for (std::size_t i = 0; i < in_channels; ++i) {
      const double* src = p.data.data() + i * p.plane;
      double* gsrc = grad_in ? grad_pad.data() + i * p.plane : nullptr;
      const std::size_t wbase = (o * in_channels + i) * kernel * kernel;
      for (std::size_t ky = 0; ky < kernel; ++ky) {
        for (std::size_t kx = 0; kx < kernel; ++kx) {
          const std::size_t shift = ky * p.row + kx;
          const double* tap = src + shift;
          double acc = 0.0;
          for (std::size_t q = 0; q < span_len; ++q) acc += wide[q] * tap[q];
          gW[wbase + ky * kernel + kx] += acc;
          if (gsrc) {
            const double wv = W[wbase + ky * kernel + kx];
            double* gtap = gsrc + shift;
            for (std::size_t q = 0; q < span_len; ++q) gtap[q] += wv * wide[q];
          }
        }
      }
    }
  }
  if (grad_in) {
    grad_in->reset(s);
    for (std::size_t c = 0; c < in_channels; ++c) {
      auto dst = grad_in->channel(c);
      for (std::size_t y = 0; y < s.height; ++y)
        std::copy_n(grad_pad.data() + c * p.plane + (y + p.pad) * p.row + p.pad, s.width,
                    dst.data() + y * s.width);
    }
  }
}

void relu_forward(Tensor& t) {
  for (double& v : t.data()) v = v > 0.0 ? v : 0.0;
}

void relu_backward(const Tensor& out, Tensor& grad) {
  const auto o = out.data();
  auto g = grad.data();
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!(o[i] > 0.0)) g[i] = 0.0;
}

void maxpool3_forward(const Tensor& in, Tensor& out, std::vector<std::uint32_t>& argmax) {
  const Shape& s = in.shape();
  out.reset(s);
  argmax.assign(s.size(), 0);
  const auto H = static_cast<std::ptrdiff_t>(s.height);
  const auto Wd = static_cast<std::ptrdiff_t>(s.width);
  for (std::size_t c = 0; c < s.channels; ++c) {
    const std::size_t base = c * s.plane();
    const auto src = in.channel(c);
    for (std::ptrdiff_t y = 0; y < H; ++y) {
      for (std::ptrdiff_t x = 0; x < Wd; ++x) {
        double best = -std::numeric_limits<double>::infinity();
        std::size_t best_idx = 0;
        for (std::ptrdiff_t yy = std::max<std::ptrdiff_t>(0, y - 1);
             yy <= std::min(H - 1, y + 1); ++yy) {
          for (std::ptrdiff_t xx = std::max<std::ptrdiff_t>(0, x - 1);
               xx <= std::min(Wd - 1, x + 1); ++xx) {
            const auto idx = static_cast<std::size_t>(yy * Wd + xx);
            if (src[idx] > best) {
              best = src[idx];
              best_idx = idx;
            }
          }
        }
        const auto o = static_cast<std::size_t>(y * Wd + x);
        out.channel(c)[o] = best;
        argmax[base + o] = static_cast<std::uint32_t>(base + best_idx);
      }
    }
  }
}

void maxpool3_backward(const Tensor& grad_out, const std::vector<std::uint32_t>& argmax,
                       Tensor& grad_in) {
  grad_in.reset(grad_out.shape());
  const auto g = grad_out.data();
  auto gi = grad_in.data();
  for (std::size_t i = 0; i < g.size(); ++i) gi[argmax[i]] += g[i];
}

void maxpool2_forward(const Tensor& in, Tensor& out, std::vector<std::uint32_t>& argmax) {
  const Shape& s = in.shape();
  const Shape os{s.channels, (s.height + 1) / 2, (s.width + 1) / 2};
  out.reset(os);
  argmax.assign(os.size(), 0);
  for (std::size_t c = 0; c < s.channels; ++c) {
    const std::size_t base = c * s.plane();
    const auto src = in.channel(c);
    for (std::size_t y = 0; y < os.height; ++y) {
      for (std::size_t x = 0; x < os.width; ++x) {
        double best = -std::numeric_limits<double>::infinity();
        std::size_t best_idx = 0;
        for (std::size_t yy = 2 * y; yy < std::min(s.height, 2 * y + 2); ++yy) {
          for (std::size_t xx = 2 * x; xx < std::min(s.width, 2 * x + 2); ++xx) {
            const std::size_t idx = yy * s.width + xx;
            if (src[idx] > best) {
              best = src[idx];
              best_idx = idx;
            }
          }
        }
        const std::size_t o = y * os.width + x;
        out.channel(c)[o] = best;
        argmax[c * os.plane() + o] = static_cast<std::uint32_t>(base + best_idx);
      }
    }
  }
}

void maxpool2_backward(const Tensor& grad_out, const std::vector<std::uint32_t>& argmax,
                       const Shape& in_shape, Tensor& grad_in) {
  grad_in.reset(in_shape);
  const auto g = grad_out.data();
  auto gi = grad_in.data();
  for (std::size_t i = 0; i < g.size(); ++i) gi[argmax[i]] += g[i];
}

void global_avg_pool_forward(const Tensor& in, std::span<double> out) {
  const Shape& s = in.shape();
  const double inv = 1.0 / static_cast<double>(s.plane());
  for (std::size_t c = 0; c < s.channels; ++c) {
    double sum = 0.0;
    for (double v : in.channel(c)) sum += v;
    out[c] = sum * inv;
  }
}

void global_avg_pool_backward(std::span<const double> grad_out, Tensor& grad_in) {
  const Shape& s = grad_in.shape();
  const double inv = 1.0 / static_cast<double>(s.plane());
  for (std::size_t c = 0; c < s.channels; ++c) {
    auto dst = grad_in.channel(c);
    std::fill(dst.begin(), dst.end(), grad_out[c] * inv);
  }
}

void Dense::forward(std::span<const double> x, std::span<const double> params,
                    std::span<double> out) const {
  const double* W = params.data() + offset;
  const double* b = W + out_features * in_features;
  for (std::size_t o = 0; o < out_features; ++o) {
    double acc = b[o];
    for (std::size_t i = 0; i < in_features; ++i) acc += W[o * in_features + i] * x[i];
    out[o] = acc;
  }
}

void Dense::backward(std::span<const double> x, std::span<const double> grad_out,
                     std::span<const double> params, std::span<double> grad_params,
                     std::span<double> grad_in) const {
  const double* W = params.data() + offset;
  double* gW = grad_params.data() + offset;
  double* gb = gW + out_features * in_features;
  std::fill(grad_in.begin(), grad_in.end(), 0.0);
  for (std::size_t o = 0; o < out_features; ++o) {
    gb[o] += grad_out[o];
    for (std::size_t i = 0; i < in_features; ++i) {
      gW[o * in_features + i] += grad_out[o] * x[i];
      grad_in[i] += grad_out[o] * W[o * in_features + i];
    }
  }
}

Tensor concat_channels(std::span<const Tensor* const> parts) {
  Shape s = parts.front()->shape();
  s.channels = 0;
  for (const Tensor* p : parts) {
    if (p->shape().height != s.height || p->shape().width != s.width)
      fail("ShapeMismatch", "concat of tensors with different spatial size");
    s.channels += p->shape().channels;
  }
  Tensor out(s);
  auto dst = out.data().begin();
  for (const Tensor* p : parts) dst = std::copy(p->data().begin(), p->data().end(), dst);
  return out;
}

std::vector<Tensor> split_channels(const Tensor& grad, std::span<const Shape> shapes) {
  std::vector<Tensor> out;
  auto src = grad.data().begin();
  for (const Shape& s : shapes) {
    Tensor t(s);
    std::copy(src, src + static_cast<std::ptrdiff_t>(s.size()), t.data().begin());
    src += static_cast<std::ptrdiff_t>(s.size());
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace malvis::cnn
