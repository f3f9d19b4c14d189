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

// A small inception-style network trained from scratch on single-channel
// images (28 x 28 by default):
//
//   input 1 x s x s
//   stem    3x3 conv, 8 filters, ReLU, then 2x2/2 max pool (optional)
//   block1  [1x1 conv 8 | 3x3 conv 8 | 5x5 conv 4 | 3x3 maxpool -> 1x1 conv 4],
//           each followed by ReLU, concatenated to 24 channels
//   block2  same branch layout on the 24-channel input
//   global average pool -> dense -> softmax
//
// All convolutions are stride 1 with "same" padding. The stem pool halves the
// spatial size the inception blocks run at (14 x 14 for 28 x 28 input), which
// cuts training cost by about 4x; set stem_pool = false to run the blocks at
// full resolution. The parameter count for four classes is just over 6k.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "malvis/classifier.hpp"
#include "malvis/cnn_layers.hpp"

namespace malvis {

struct CnnArchitecture {
  std::size_t input_side = 28;
  std::size_t stem_filters = 8;
  bool stem_pool = true;
  std::size_t branch_1x1 = 8;
  std::size_t branch_3x3 = 8;
  std::size_t branch_5x5 = 4;
  std::size_t branch_pool = 4;
  std::size_t n_classes = 2;

  std::size_t block_channels() const {
    return branch_1x1 + branch_3x3 + branch_5x5 + branch_pool;
  }
};

struct CnnTrainOptions {
  int epochs = 25;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  // Retain the parameters after every epoch in CnnTrainResult::checkpoints.
  bool keep_checkpoints = false;
};

class SmallCnn final : public Classifier {
 public:
  // Uniform He initialisation for every weight, zero biases.
  SmallCnn(CnnArchitecture arch, std::uint64_t init_seed);
  // All parameters zero.
  explicit SmallCnn(CnnArchitecture arch);

  const CnnArchitecture& architecture() const { return arch_; }
  std::size_t parameter_count() const { return params_.size(); }
  std::span<const double> parameters() const { return params_; }
  std::span<double> mutable_parameters() { return params_; }
  void set_parameters(std::vector<double> params);

  // Rows are flattened side x side images. Throws ShapeMismatch.
  ProbMatrix forward(const Matrix& batch) const;
  // Mean cross-entropy over the batch; grad receives the mean gradient over
  // samples (same layout as parameters()). Per-sample gradients are summed in
  // sample order, so the result does not depend on `threads`.
  double backward(const Matrix& batch, std::span<const int> labels, std::span<double> grad,
                  std::size_t threads = 1) const;

  ClassifierKind kind() const override { return ClassifierKind::kSmallCnn; }
  std::size_t n_classes() const override { return arch_.n_classes; }
  std::size_t input_dim() const override { return arch_.input_side * arch_.input_side; }
  ProbMatrix predict_proba(const Matrix& X) const override { return forward(X); }
  Hyperparameters hyperparameters() const override;
  ParameterBlobs parameter_blobs() const override { return {params_}; }

  static std::unique_ptr<SmallCnn> restore(const Hyperparameters& h, const ParameterBlobs& b);

  std::size_t threads = 1;

 private:
  struct Block {
    cnn::Conv2d b1, b3, b5, proj;
  };
  struct BlockCache {
    cnn::Tensor b1, b3, b5, pooled, bp, out;
    std::vector<std::uint32_t> argmax;
  };
  struct SampleCache {
    cnn::Tensor input, stem, stem_pooled;
    std::vector<std::uint32_t> stem_argmax;
    BlockCache blocks[2];
    std::vector<double> pooled;
    std::vector<double> logits;
  };

  void layout();
  void forward_sample(std::span<const double> x, SampleCache& cache) const;
  void backward_sample(const SampleCache& cache, std::span<const double> grad_logits,
                       std::span<double> grad) const;
  void forward_block(const Block& blk, const cnn::Tensor& in, BlockCache& cache) const;
  cnn::Tensor backward_block(const Block& blk, const cnn::Tensor& in, const BlockCache& cache,
                             const cnn::Tensor& grad_out, std::span<double> grad) const;
  void check_batch(const Matrix& batch) const;

  CnnArchitecture arch_;
  cnn::Conv2d stem_;
  Block blocks_[2];
  cnn::Dense dense_;
  std::vector<double> params_;
};

struct CnnTrainResult {
  std::unique_ptr<SmallCnn> model;  // checkpoint of the selected epoch
  FitResult fit;
  std::vector<std::vector<double>> checkpoints;  // per epoch, when requested
};

// Adam on mini-batches. After each epoch the train and validation accuracy
// are recorded; the returned model is the checkpoint with the best
// validation accuracy, earliest on ties. Throws InvalidLabels for a
// single-class training set and Diverged on a non-finite loss.
CnnTrainResult cnn_train(const Matrix& X_train, std::span<const int> y_train, const Matrix& X_val,
                         std::span<const int> y_val, const CnnArchitecture& arch,
                         const CnnTrainOptions& options);

}  // namespace malvis
