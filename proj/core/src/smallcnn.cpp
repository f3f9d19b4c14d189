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

#include "malvis/smallcnn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "classifier_detail.hpp"
#include "malvis/parallel.hpp"
#include "malvis/rng.hpp"

namespace malvis {

using cnn::Conv2d;
using cnn::Shape;
using cnn::Tensor;

SmallCnn::SmallCnn(CnnArchitecture arch) : arch_(arch) { layout(); }

SmallCnn::SmallCnn(CnnArchitecture arch, std::uint64_t init_seed) : arch_(arch) {
  layout();
  Rng rng = Rng::derive(init_seed, 0xc0de);
  auto init_conv = [&](const Conv2d& c) {
    const double limit =
        std::sqrt(6.0 / static_cast<double>(c.in_channels * c.kernel * c.kernel));
    for (std::size_t p = 0; p < c.weight_count(); ++p)
      params_[c.offset + p] = rng.uniform(-limit, limit);
  };
  init_conv(stem_);
  for (const Block& b : blocks_) {
    init_conv(b.b1);
    init_conv(b.b3);
    init_conv(b.b5);
    init_conv(b.proj);
  }
  const double limit = std::sqrt(6.0 / static_cast<double>(dense_.in_features));
  for (std::size_t p = 0; p < dense_.out_features * dense_.in_features; ++p)
    params_[dense_.offset + p] = rng.uniform(-limit, limit);
}

void SmallCnn::layout() {
  if (arch_.input_side == 0 || arch_.n_classes < 2)
    fail("InvalidArgument", "cnn needs a positive input side and at least two classes");
  std::size_t offset = 0;
  auto conv = [&](std::size_t in, std::size_t out, std::size_t k) {
    Conv2d c{in, out, k, offset};
    offset += c.param_count();
    return c;
  };
  stem_ = conv(1, arch_.stem_filters, 3);
  std::size_t in = arch_.stem_filters;
  for (Block& b : blocks_) {
    b.b1 = conv(in, arch_.branch_1x1, 1);
    b.b3 = conv(in, arch_.branch_3x3, 3);
    b.b5 = conv(in, arch_.branch_5x5, 5);
    b.proj = conv(in, arch_.branch_pool, 1);
    in = arch_.block_channels();
  }
  dense_ = cnn::Dense{in, arch_.n_classes, offset};
  offset += dense_.param_count();
  params_.assign(offset, 0.0);
}

void SmallCnn::set_parameters(std::vector<double> params) {
  if (params.size() != params_.size()) fail("ShapeMismatch", "cnn parameter count mismatch");
  params_ = std::move(params);
}

void SmallCnn::check_batch(const Matrix& batch) const {
  if (batch.cols() != input_dim())
    fail("ShapeMismatch", "cnn expects rows of " + std::to_string(input_dim()) + " pixels, got " +
                              std::to_string(batch.cols()));
}

void SmallCnn::forward_block(const Block& blk, const Tensor& in, BlockCache& cache) const {
  blk.b1.forward(in, params_, cache.b1);
  cnn::relu_forward(cache.b1);
  blk.b3.forward(in, params_, cache.b3);
  cnn::relu_forward(cache.b3);
  blk.b5.forward(in, params_, cache.b5);
  cnn::relu_forward(cache.b5);
  cnn::maxpool3_forward(in, cache.pooled, cache.argmax);
  blk.proj.forward(cache.pooled, params_, cache.bp);
  cnn::relu_forward(cache.bp);
  const Tensor* parts[] = {&cache.b1, &cache.b3, &cache.b5, &cache.bp};
  cache.out = cnn::concat_channels(parts);
}

void SmallCnn::forward_sample(std::span<const double> x, SampleCache& cache) const {
  const std::size_t s = arch_.input_side;
  cache.input.reset({1, s, s});
  std::copy(x.begin(), x.end(), cache.input.data().begin());
  stem_.forward(cache.input, params_, cache.stem);
  cnn::relu_forward(cache.stem);
  if (arch_.stem_pool) {
    cnn::maxpool2_forward(cache.stem, cache.stem_pooled, cache.stem_argmax);
  } else {
    cache.stem_pooled = cache.stem;
  }
  forward_block(blocks_[0], cache.stem_pooled, cache.blocks[0]);
  forward_block(blocks_[1], cache.blocks[0].out, cache.blocks[1]);
  cache.pooled.assign(dense_.in_features, 0.0);
  cnn::global_avg_pool_forward(cache.blocks[1].out, cache.pooled);
  cache.logits.assign(arch_.n_classes, 0.0);
  dense_.forward(cache.pooled, params_, cache.logits);
}

Tensor SmallCnn::backward_block(const Block& blk, const Tensor& in, const BlockCache& cache,
                                const Tensor& grad_out, std::span<double> grad) const {
  const Shape shapes[] = {cache.b1.shape(), cache.b3.shape(), cache.b5.shape(),
                          cache.bp.shape()};
  auto parts = cnn::split_channels(grad_out, shapes);
  cnn::relu_backward(cache.b1, parts[0]);
  cnn::relu_backward(cache.b3, parts[1]);
  cnn::relu_backward(cache.b5, parts[2]);
  cnn::relu_backward(cache.bp, parts[3]);

  Tensor grad_in, tmp;
  blk.b1.backward(in, parts[0], params_, grad, &grad_in);
  auto add = [&](const Tensor& t) {
    auto dst = grad_in.data();
    const auto src = t.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  };
  blk.b3.backward(in, parts[1], params_, grad, &tmp);
  add(tmp);
  blk.b5.backward(in, parts[2], params_, grad, &tmp);
  add(tmp);
  Tensor grad_pooled;
  blk.proj.backward(cache.pooled, parts[3], params_, grad, &grad_pooled);
  cnn::maxpool3_backward(grad_pooled, cache.argmax, tmp);
  add(tmp);
  return grad_in;
}

void SmallCnn::backward_sample(const SampleCache& cache, std::span<const double> grad_logits,
                               std::span<double> grad) const {
  std::vector<double> grad_pooled(dense_.in_features);
  dense_.backward(cache.pooled, grad_logits, params_, grad, grad_pooled);
  Tensor g2(cache.blocks[1].out.shape());
  cnn::global_avg_pool_backward(grad_pooled, g2);
  Tensor g1 = backward_block(blocks_[1], cache.blocks[0].out, cache.blocks[1], g2, grad);
  Tensor g0 = backward_block(blocks_[0], cache.stem_pooled, cache.blocks[0], g1, grad);
  if (arch_.stem_pool) {
    Tensor unpooled;
    cnn::maxpool2_backward(g0, cache.stem_argmax, cache.stem.shape(), unpooled);
    g0 = std::move(unpooled);
  }
  cnn::relu_backward(cache.stem, g0);
  stem_.backward(cache.input, g0, params_, grad, nullptr);
}

ProbMatrix SmallCnn::forward(const Matrix& batch) const {
  check_batch(batch);
  Matrix probs(batch.rows(), arch_.n_classes);
  parallel_for(batch.rows(), threads, [&](std::size_t i) {
    SampleCache cache;
    forward_sample(batch.row(i), cache);
    std::copy(cache.logits.begin(), cache.logits.end(), probs.row(i).begin());
    softmax_inplace(probs.row(i));
  });
  return ProbMatrix(std::move(probs));
}

double SmallCnn::backward(const Matrix& batch, std::span<const int> labels,
                          std::span<double> grad, std::size_t n_threads) const {
  check_batch(batch);
  if (labels.size() != batch.rows()) fail("ShapeMismatch", "label count does not match batch");
  if (grad.size() != params_.size()) fail("ShapeMismatch", "gradient buffer size mismatch");
  const std::size_t n = batch.rows();
  const std::size_t P = params_.size();
  std::vector<double> per_sample(n * P, 0.0);
  std::vector<double> losses(n, 0.0);
  parallel_for(n, n_threads, [&](std::size_t i) {
    SampleCache cache;
    forward_sample(batch.row(i), cache);
    std::vector<double> p = cache.logits;
    const double top = *std::max_element(p.begin(), p.end());
    double sum = 0.0;
    for (double v : p) sum += std::exp(v - top);
    const double lse = top + std::log(sum);
    const auto label = static_cast<std::size_t>(labels[i]);
    losses[i] = lse - cache.logits[label];
    for (std::size_t k = 0; k < p.size(); ++k)
      p[k] = std::exp(cache.logits[k] - lse) - (k == label ? 1.0 : 0.0);
    backward_sample(cache, p, std::span(per_sample).subspan(i * P, P));
  });
  std::fill(grad.begin(), grad.end(), 0.0);
  double loss = 0.0;
  const double inv = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    loss += losses[i];
    const double* g = per_sample.data() + i * P;
    for (std::size_t p = 0; p < P; ++p) grad[p] += g[p];
  }
  for (double& g : grad) g *= inv;
  return loss * inv;
}

Hyperparameters SmallCnn::hyperparameters() const {
  return {{"input_side", static_cast<double>(arch_.input_side)},
          {"stem_filters", static_cast<double>(arch_.stem_filters)},
          {"stem_pool", arch_.stem_pool ? 1.0 : 0.0},
          {"branch_1x1", static_cast<double>(arch_.branch_1x1)},
          {"branch_3x3", static_cast<double>(arch_.branch_3x3)},
          {"branch_5x5", static_cast<double>(arch_.branch_5x5)},
          {"branch_pool", static_cast<double>(arch_.branch_pool)},
          {"n_classes", static_cast<double>(arch_.n_classes)},
          {"input_dim", static_cast<double>(input_dim())}};
}

std::unique_ptr<SmallCnn> SmallCnn::restore(const Hyperparameters& h, const ParameterBlobs& b) {
  detail::expect_blobs(b, 1, "smallcnn");
  CnnArchitecture a;
  a.input_side = detail::hyper_size(h, "input_side");
  a.stem_filters = detail::hyper_size(h, "stem_filters");
  a.stem_pool = detail::hyper_value(h, "stem_pool") != 0.0;
  a.branch_1x1 = detail::hyper_size(h, "branch_1x1");
  a.branch_3x3 = detail::hyper_size(h, "branch_3x3");
  a.branch_5x5 = detail::hyper_size(h, "branch_5x5");
  a.branch_pool = detail::hyper_size(h, "branch_pool");
  a.n_classes = detail::hyper_size(h, "n_classes");
  auto m = std::make_unique<SmallCnn>(a);
  m->set_parameters(b[0]);
  return m;
}

namespace {

double mean_loss(const ProbMatrix& p, std::span<const int> y) {
  double loss = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i)
    loss -= std::log(std::max(p(i, static_cast<std::size_t>(y[i])), 1e-300));
  return y.empty() ? 0.0 : loss / static_cast<double>(y.size());
}

}  // namespace

CnnTrainResult cnn_train(const Matrix& X_train, std::span<const int> y_train, const Matrix& X_val,
                         std::span<const int> y_val, const CnnArchitecture& arch,
                         const CnnTrainOptions& options) {
  check_labels(y_train, arch.n_classes, X_train.rows(), true);
  if (options.epochs < 1) fail("InvalidArgument", "epochs must be positive");
  if (options.batch_size < 1) fail("InvalidArgument", "batch size must be positive");
  if (X_val.rows() != y_val.size()) fail("DimMismatch", "validation labels mismatch");

  auto model = std::make_unique<SmallCnn>(arch, options.seed);
  model->threads = options.threads;
  const std::size_t P = model->parameter_count();
  std::vector<double> m(P, 0.0), v(P, 0.0), grad(P, 0.0);
  Rng rng = Rng::derive(options.seed, 0x5eed);
  std::vector<std::size_t> order(X_train.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});

  CnnTrainResult result;
  std::vector<double> best(model->parameters().begin(), model->parameters().end());
  double best_val = -1.0;
  std::uint64_t step = 0;
  std::vector<int> batch_labels;
  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
      const std::size_t end = std::min(order.size(), start + options.batch_size);
      const auto idx = std::span(order).subspan(start, end - start);
      const Matrix batch = X_train.select_rows(idx);
      batch_labels.clear();
      for (std::size_t i : idx) batch_labels.push_back(y_train[i]);
      const double loss = model->backward(batch, batch_labels, grad, options.threads);
      if (!std::isfinite(loss))
        fail_numeric("Diverged", "cnn loss became non-finite in epoch " + std::to_string(epoch));

      ++step;
      const double c1 = 1.0 - std::pow(options.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(options.beta2, static_cast<double>(step));
      auto params = model->mutable_parameters();
      for (std::size_t p = 0; p < P; ++p) {
        m[p] = options.beta1 * m[p] + (1.0 - options.beta1) * grad[p];
        v[p] = options.beta2 * v[p] + (1.0 - options.beta2) * grad[p] * grad[p];
        params[p] -= options.learning_rate * (m[p] / c1) / (std::sqrt(v[p] / c2) + options.epsilon);
      }
    }

    const ProbMatrix train_probs = model->forward(X_train);
    TrainRecord rec;
    rec.epoch = epoch;
    rec.loss = mean_loss(train_probs, y_train);
    if (!std::isfinite(rec.loss))
      fail_numeric("Diverged", "cnn training loss is non-finite after epoch " + std::to_string(epoch));
    rec.train_accuracy = accuracy(train_probs, y_train);
    rec.val_accuracy =
        X_val.rows() > 0 ? accuracy(model->forward(X_val), y_val) : rec.train_accuracy;
    result.fit.history.push_back(rec);
    if (options.keep_checkpoints)
      result.checkpoints.emplace_back(model->parameters().begin(), model->parameters().end());
    if (rec.val_accuracy > best_val) {
      best_val = rec.val_accuracy;
      best.assign(model->parameters().begin(), model->parameters().end());
      result.fit.selected_epoch = epoch;
    }
  }
  model->set_parameters(std::move(best));
  result.model = std::move(model);
  return result;
}

}  // namespace malvis
