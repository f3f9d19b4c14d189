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

namespace malvis {

void SoftmaxClassifier::initialize(std::size_t dim, std::size_t n_classes) {
  dim_ = dim;
  n_classes_ = n_classes;
  params_.assign(n_classes * (dim + 1), 0.0);
}

FitResult SoftmaxClassifier::fit(const Matrix& X, std::span<const int> y, std::size_t n_classes,
                                 const Matrix* X_val, std::span<const int> y_val) {
  check_labels(y, n_classes, X.rows(), true);
  if (!X.all_finite()) fail("InvalidArgument", "softmax input has non-finite entries");
  initialize(X.cols(), n_classes);
  return run_training(X, y, X_val, y_val);
}

double SoftmaxClassifier::objective(const Matrix& X, std::span<const int> y,
                                    std::span<const std::size_t> rows,
                                    std::span<double> grad) const {
  const std::size_t d = dim_;
  const std::size_t c = n_classes_;
  const double* W = params_.data();
  const double* b = params_.data() + c * d;
  std::vector<std::size_t> all;
  if (rows.empty()) {
    all.resize(X.rows());
    std::iota(all.begin(), all.end(), std::size_t{0});
    rows = all;
  }
  const bool want_grad = !grad.empty();
  if (want_grad) std::fill(grad.begin(), grad.end(), 0.0);
  const double inv_m = 1.0 / static_cast<double>(rows.size());

  std::vector<double> z(c);
  double loss = 0.0;
  for (std::size_t r : rows) {
    const auto x = X.row(r);
    for (std::size_t k = 0; k < c; ++k) z[k] = b[k] + dot({W + k * d, d}, x);
    const double top = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - top);
    const double lse = top + std::log(sum);
    const auto label = static_cast<std::size_t>(y[r]);
    loss += lse - z[label];
    if (!want_grad) continue;
    for (std::size_t k = 0; k < c; ++k) {
      const double g = (std::exp(z[k] - lse) - (k == label ? 1.0 : 0.0)) * inv_m;
      double* gw = grad.data() + k * d;
      for (std::size_t j = 0; j < d; ++j) gw[j] += g * x[j];
      grad[c * d + k] += g;
    }
  }
  loss *= inv_m;
  const double l2 = options_.l2;
  if (l2 > 0) {
    double sq = 0.0;
    for (std::size_t p = 0; p < c * d; ++p) {
      sq += W[p] * W[p];
      if (want_grad) grad[p] += l2 * W[p];
    }
    loss += 0.5 * l2 * sq;
  }
  return loss;
}

Matrix SoftmaxClassifier::logits(const Matrix& X) const {
  check_input(X);
  Matrix z(X.rows(), n_classes_);
  const double* W = params_.data();
  const double* b = params_.data() + n_classes_ * dim_;
  for (std::size_t i = 0; i < X.rows(); ++i)
    for (std::size_t k = 0; k < n_classes_; ++k)
      z(i, k) = b[k] + dot({W + k * dim_, dim_}, X.row(i));
  return z;
}

ProbMatrix SoftmaxClassifier::predict_proba(const Matrix& X) const {
  Matrix z = logits(X);
  for (std::size_t i = 0; i < z.rows(); ++i) softmax_inplace(z.row(i));
  return ProbMatrix(std::move(z));
}

Hyperparameters SoftmaxClassifier::hyperparameters() const {
  return {{"n_classes", static_cast<double>(n_classes_)},
          {"input_dim", static_cast<double>(dim_)},
          {"epochs", static_cast<double>(options_.epochs)},
          {"learning_rate", options_.learning_rate},
          {"l2", options_.l2},
          {"batch_size", static_cast<double>(options_.batch_size)},
          {"seed", static_cast<double>(options_.seed)}};
}

ParameterBlobs SoftmaxClassifier::parameter_blobs() const { return {params_}; }

std::unique_ptr<SoftmaxClassifier> SoftmaxClassifier::restore(const Hyperparameters& h,
                                                              const ParameterBlobs& b) {
  detail::expect_blobs(b, 1, "softmax");
  GradientOptions o;
  o.epochs = static_cast<int>(detail::hyper_value(h, "epochs"));
  o.learning_rate = detail::hyper_value(h, "learning_rate");
  o.l2 = detail::hyper_value(h, "l2");
  o.batch_size = detail::hyper_size(h, "batch_size");
  o.seed = static_cast<std::uint64_t>(detail::hyper_value(h, "seed"));
  auto m = std::make_unique<SoftmaxClassifier>(o);
  m->initialize(detail::hyper_size(h, "input_dim"), detail::hyper_size(h, "n_classes"));
  m->set_parameters(b[0]);
  return m;
}

}  // namespace malvis
