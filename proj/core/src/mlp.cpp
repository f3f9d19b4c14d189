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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "classifier_detail.hpp"
#include "malvis/baselines.hpp"
#include "malvis/rng.hpp"

namespace malvis {

void MlpClassifier::initialize(std::size_t dim, std::size_t n_classes) {
  if (hidden_ < 1) fail("InvalidArgument", "hidden width must be positive");
  dim_ = dim;
  n_classes_ = n_classes;
  params_.assign(hidden_ * dim + hidden_ + n_classes * hidden_ + n_classes, 0.0);
  Rng rng = Rng::derive(options_.seed, 0x1417);
  const double limit = std::sqrt(6.0 / static_cast<double>(dim));
  for (std::size_t p = 0; p < hidden_ * dim; ++p) params_[p] = rng.uniform(-limit, limit);
}

FitResult MlpClassifier::fit(const Matrix& X, std::span<const int> y, std::size_t n_classes,
                             const Matrix* X_val, std::span<const int> y_val) {
  check_labels(y, n_classes, X.rows(), true);
  if (!X.all_finite()) fail("InvalidArgument", "mlp input has non-finite entries");
  initialize(X.cols(), n_classes);
  return run_training(X, y, X_val, y_val);
}

void MlpClassifier::forward_row(std::span<const double> x, std::span<double> h,
                                std::span<double> z) const {
  const double* W1 = params_.data();
  const double* b1 = W1 + hidden_ * dim_;
  const double* W2 = b1 + hidden_;
  const double* b2 = W2 + n_classes_ * hidden_;
  for (std::size_t u = 0; u < hidden_; ++u)
    h[u] = std::max(0.0, b1[u] + dot({W1 + u * dim_, dim_}, x));
  for (std::size_t k = 0; k < n_classes_; ++k)
    z[k] = b2[k] + dot({W2 + k * hidden_, hidden_}, h);
}

double MlpClassifier::objective(const Matrix& X, std::span<const int> y,
                                std::span<const std::size_t> rows, std::span<double> grad) const {
  const std::size_t d = dim_;
  const std::size_t hn = hidden_;
  const std::size_t c = n_classes_;
  std::vector<std::size_t> all;
  if (rows.empty()) {
    all.resize(X.rows());
    std::iota(all.begin(), all.end(), std::size_t{0});
    rows = all;
  }
  const bool want_grad = !grad.empty();
  if (want_grad) std::fill(grad.begin(), grad.end(), 0.0);
  const double inv_m = 1.0 / static_cast<double>(rows.size());
  const double* W2 = params_.data() + hn * d + hn;
  double* gW1 = want_grad ? grad.data() : nullptr;
  double* gb1 = want_grad ? gW1 + hn * d : nullptr;
  double* gW2 = want_grad ? gb1 + hn : nullptr;
  double* gb2 = want_grad ? gW2 + c * hn : nullptr;

  std::vector<double> h(hn), z(c), dh(hn);
  double loss = 0.0;
  for (std::size_t r : rows) {
    const auto x = X.row(r);
    forward_row(x, h, z);
    const double top = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - top);
    const double lse = top + std::log(sum);
    const auto label = static_cast<std::size_t>(y[r]);
    loss += lse - z[label];
    if (!want_grad) continue;
    std::fill(dh.begin(), dh.end(), 0.0);
    for (std::size_t k = 0; k < c; ++k) {
      const double g = (std::exp(z[k] - lse) - (k == label ? 1.0 : 0.0)) * inv_m;
      gb2[k] += g;
      for (std::size_t u = 0; u < hn; ++u) {
        gW2[k * hn + u] += g * h[u];
        dh[u] += g * W2[k * hn + u];
      }
    }
    for (std::size_t u = 0; u < hn; ++u) {
      if (h[u] <= 0.0) continue;
      gb1[u] += dh[u];
      double* row = gW1 + u * d;
      for (std::size_t j = 0; j < d; ++j) row[j] += dh[u] * x[j];
    }
  }
  loss *= inv_m;
  const double l2 = options_.l2;
  if (l2 > 0) {
    double sq = 0.0;
    auto penalize = [&](std::size_t offset, std::size_t count) {
      for (std::size_t p = offset; p < offset + count; ++p) {
        sq += params_[p] * params_[p];
        if (want_grad) grad[p] += l2 * params_[p];
      }
    };
    penalize(0, hn * d);
    penalize(hn * d + hn, c * hn);
    loss += 0.5 * l2 * sq;
  }
  return loss;
}

ProbMatrix MlpClassifier::predict_proba(const Matrix& X) const {
  check_input(X);
  Matrix out(X.rows(), n_classes_);
  std::vector<double> h(hidden_);
  for (std::size_t i = 0; i < X.rows(); ++i) {
    forward_row(X.row(i), h, out.row(i));
    softmax_inplace(out.row(i));
  }
  return ProbMatrix(std::move(out));
}

Hyperparameters MlpClassifier::hyperparameters() const {
  return {{"n_classes", static_cast<double>(n_classes_)},
          {"input_dim", static_cast<double>(dim_)},
          {"hidden", static_cast<double>(hidden_)},
          {"epochs", static_cast<double>(options_.epochs)},
          {"learning_rate", options_.learning_rate},
          {"l2", options_.l2},
          {"batch_size", static_cast<double>(options_.batch_size)},
          {"seed", static_cast<double>(options_.seed)}};
}

ParameterBlobs MlpClassifier::parameter_blobs() const { return {params_}; }

std::unique_ptr<MlpClassifier> MlpClassifier::restore(const Hyperparameters& h,
                                                      const ParameterBlobs& b) {
  detail::expect_blobs(b, 1, "mlp");
  MlpOptions o;
  o.hidden = detail::hyper_size(h, "hidden");
  o.gradient.epochs = static_cast<int>(detail::hyper_value(h, "epochs"));
  o.gradient.learning_rate = detail::hyper_value(h, "learning_rate");
  o.gradient.l2 = detail::hyper_value(h, "l2");
  o.gradient.batch_size = detail::hyper_size(h, "batch_size");
  o.gradient.seed = static_cast<std::uint64_t>(detail::hyper_value(h, "seed"));
  auto m = std::make_unique<MlpClassifier>(o);
  m->initialize(detail::hyper_size(h, "input_dim"), detail::hyper_size(h, "n_classes"));
  m->set_parameters(b[0]);
  return m;
}

}  // namespace malvis
