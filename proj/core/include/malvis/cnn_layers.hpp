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

#pragma once

// Per-sample layer primitives for the small convolutional network. Tensors
// are channel-major (C x H x W). Backward passes accumulate into the
// parameter-gradient span and overwrite the input gradient.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace malvis::cnn {

struct Shape {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;

  std::size_t size() const { return channels * height * width; }
  std::size_t plane() const { return height * width; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0) : shape_(shape), data_(shape.size(), fill) {}

  const Shape& shape() const { return shape_; }
  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::span<double> channel(std::size_t c) {
    return {data_.data() + c * shape_.plane(), shape_.plane()};
  }
  std::span<const double> channel(std::size_t c) const {
    return {data_.data() + c * shape_.plane(), shape_.plane()};
  }
  double& at(std::size_t c, std::size_t y, std::size_t x) {
    return data_[(c * shape_.height + y) * shape_.width + x];
  }
  double at(std::size_t c, std::size_t y, std::size_t x) const {
    return data_[(c * shape_.height + y) * shape_.width + x];
  }
  void reset(Shape shape, double fill = 0.0) {
    shape_ = shape;
    data_.assign(shape.size(), fill);
  }

 private:
  Shape shape_;
  std::vector<double> data_;
};

// Stride-1 "same" convolution with an odd square kernel. Parameters sit at
// params[offset...]: weights [out][in][k][k] followed by bias [out].
struct Conv2d {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 1;
  std::size_t offset = 0;

  std::size_t weight_count() const { return out_channels * in_channels * kernel * kernel; }
  std::size_t param_count() const { return weight_count() + out_channels; }

  void forward(const Tensor& in, std::span<const double> params, Tensor& out) const;
  // grad_in may be null when the input gradient is not needed.
  void backward(const Tensor& in, const Tensor& grad_out, std::span<const double> params,
                std::span<double> grad_params, Tensor* grad_in) const;
};

void relu_forward(Tensor& t);
// Zeroes grad where the ReLU output was not positive.
void relu_backward(const Tensor& out, Tensor& grad);

// 3x3 max pooling, stride 1, "same" size (padding never wins). argmax keeps
// the flat input index chosen for each output element.
void maxpool3_forward(const Tensor& in, Tensor& out, std::vector<std::uint32_t>& argmax);
void maxpool3_backward(const Tensor& grad_out, const std::vector<std::uint32_t>& argmax,
                       Tensor& grad_in);

// 2x2 max pooling, stride 2. Odd extents keep a final partial window.
void maxpool2_forward(const Tensor& in, Tensor& out, std::vector<std::uint32_t>& argmax);
void maxpool2_backward(const Tensor& grad_out, const std::vector<std::uint32_t>& argmax,
                       const Shape& in_shape, Tensor& grad_in);

void global_avg_pool_forward(const Tensor& in, std::span<double> out);
void global_avg_pool_backward(std::span<const double> grad_out, Tensor& grad_in);

// Fully connected layer: weights [out][in] then bias [out] at params[offset...].
struct Dense {
  std::size_t in_features = 0;
  std::size_t out_features = 0;
  std::size_t offset = 0;

  std::size_t param_count() const { return out_features * in_features + out_features; }
  void forward(std::span<const double> x, std::span<const double> params,
               std::span<double> out) const;
  void backward(std::span<const double> x, std::span<const double> grad_out,
                std::span<const double> params, std::span<double> grad_params,
                std::span<double> grad_in) const;
};

// Stacks tensors of equal spatial size along the channel axis.
Tensor concat_channels(std::span<const Tensor* const> parts);
// Inverse of concat_channels for gradients: splits grad into the given shapes.
std::vector<Tensor> split_channels(const Tensor& grad, std::span<const Shape> shapes);

}  // namespace malvis::cnn
