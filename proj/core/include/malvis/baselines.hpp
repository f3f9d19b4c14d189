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

// From-scratch comparison classifiers: k-nearest neighbours, Gaussian naive
// Bayes, linear discriminant analysis, multinomial logistic regression,
// one-vs-rest linear SVM and a one-hidden-layer perceptron.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "malvis/classifier.hpp"

namespace malvis {

// Vote fractions among the k nearest training points under L2 distance.
// Distance ties go to the lower training index.
class KnnClassifier final : public Classifier {
 public:
  explicit KnnClassifier(std::size_t k = 5) : k_(k) {}

  // Throws KTooLarge when k exceeds the number of training rows.
  void fit(const Matrix& X, std::span<const int> y, std::size_t n_classes);

  // Training indices of the k nearest points, nearest first.
  std::vector<std::size_t> neighbors(std::span<const double> query) const;

  ClassifierKind kind() const override { return ClassifierKind::kKnn; }
  std::size_t n_classes() const override { return n_classes_; }
  std::size_t input_dim() const override { return X_.cols(); }
  ProbMatrix predict_proba(const Matrix& X) const override;
  Hyperparameters hyperparameters() const override;
  ParameterBlobs parameter_blobs() const override;

  static std::unique_ptr<KnnClassifier> restore(const Hyperparameters& h, const ParameterBlobs& b);

  std::size_t threads = 1;

 private:
  std::size_t k_;
  std::size_t n_classes_ = 0;
  Matrix X_;
  std::vector<int> y_;
};

// Per-feature Gaussian likelihoods with empirical class priors. Variances
// get epsilon = 1e-9 * (largest feature variance) added.
class GaussianNbClassifier final : public Classifier {
 public:
  void fit(const Matrix& X, std::span<const int> y, std::size_t n_classes);

  ClassifierKind kind() const override { return ClassifierKind::kGnb; }
  std::size_t n_classes() const override { return priors_.size(); }
  std::size_t input_dim() const override { return means_.cols(); }
  ProbMatrix predict_proba(const Matrix& X) const override;
  Hyperparameters hyperparameters() const override;
  ParameterBlobs parameter_blobs() const override;

  static std::unique_ptr<GaussianNbClassifier> restore(const Hyperparameters& h,
                                                       const ParameterBlobs& b);

  double epsilon() const { return epsilon_; }

 private:
  std::vector<double> priors_;
  Matrix means_;
  Matrix variances_;  // smoothed
  double epsilon_ = 0.0;
};

// Gaussian class posteriors with a shared covariance: the pooled within-class
// covariance plus ridge (1e-6 * trace / d) * I. Stored in discriminant form,
// log-posterior(c) = coef[c] . x + intercept[c] + const.
class LdaClassifier final : public Classifier {
 public:
  void fit(const Matrix& X, std::span<const int> y, std::size_t n_classes);

  ClassifierKind kind() const override { return ClassifierKind::kLda; }
  std::size_t n_classes() const override { return intercepts_.size(); }
  std::size_t input_dim() const override { return coef_.cols(); }
  ProbMatrix predict_proba(const Matrix& X) const override;
  Matrix discriminants(const Matrix& X) const;
  Hyperparameters hyperparameters() const override;
  ParameterBlobs parameter_blobs() const override;

  static std::unique_ptr<LdaClassifier> restore(const Hyperparameters& h, const ParameterBlobs& b);

 private:
  Matrix coef_;  // c x d
  std::vector<double> intercepts_;
};

// Multinomial logistic regression. Parameter layout: W (c x d, row-major)
// followed by b (c). Zero initialised.
class SoftmaxClassifier final : public GradientClassifier {
 public:
  explicit SoftmaxClassifier(GradientOptions options = {}) : GradientClassifier(options) {}

  // Sets dimensions and zero parameters without training.
  void initialize(std::size_t dim, std::size_t n_classes);
  FitResult fit(const Matrix& X, std::span<const int> y, std::size_t n_classes,
                const Matrix* X_val = nullptr, std::span<const int> y_val = {});

  double objective(const Matrix& X, std::span<const int> y, std::span<const std::size_t> rows,
                   std::span<double> grad) const override;
  Matrix logits(const Matrix& X) const;

  ClassifierKind kind() const override { return ClassifierKind::kSoftmax; }
  std::size_t n_classes() const override { return n_classes_; }
  std::size_t input_dim() const override { return dim_; }
  ProbMatrix predict_proba(const Matrix& X) const override;
  Hyperparameters hyperparameters() const override;
  ParameterBlobs parameter_blobs() const override;

  static std::unique_ptr<SoftmaxClassifier> restore(const Hyperparameters& h,
                                                    const ParameterBlobs& b);

 private:
  std::size_t dim_ = 0;
  std::size_t n_classes_ = 0;
};

struct SvmOptions {
  double lambda = 1e-4;
  int epochs = 25;
  std::uint64_t seed = 0;
};

// One-vs-rest hinge loss trained with the Pegasos stochastic subgradient
// schedule (step 1 / (lambda t), projection onto the 1/sqrt(lambda) ball).
// The bias is an extra constant-one feature. predict_proba is the softmax of
// the per-class margins; this is a calibration convention, not a fitted
// probability model.
class LinearSvmClassifier final : public Classifier {
 public:
  explicit LinearSvmClassifier(SvmOptions options = {}) : options_(options) {}

  FitResult fit(const Matrix& X, std::span<const int> y, std::size_t n_classes,
                const Matrix* X_val = nullptr, std::span<const int> y_val = {});

  // n x c matrix of w_c . x + b_c.
  Matrix margins(const Matrix& X) const;

  ClassifierKind kind() const override { return ClassifierKind::kLinearSvm; }
  std::size_t n_classes() const override { return weights_.rows(); }
  std::size_t input_dim() const override { return weights_.cols() ? weights_.cols() - 1 : 0; }
  ProbMatrix predict_proba(const Matrix& X) const override;
  Hyperparameters hyperparameters() const override;
  ParameterBlobs parameter_blobs() const override;

  static std::unique_ptr<LinearSvmClassifier> restore(const Hyperparameters& h,
                                                      const ParameterBlobs& b);

 private:
  double objective(const Matrix& X, std::span<const int> y) const;

  SvmOptions options_;
  Matrix weights_;  // c x (d + 1), last column is the bias
};

struct MlpOptions {
  std::size_t hidden = 128;
  GradientOptions gradient{};
};

// One hidden ReLU layer and a softmax output. Parameter layout:
// W1 (h x d), b1 (h), W2 (c x h), b2 (c). W1 uses uniform He initialisation,
// everything else starts at zero.
class MlpClassifier final : public GradientClassifier {
 public:
  explicit MlpClassifier(MlpOptions options = {})
      : GradientClassifier(options.gradient), hidden_(options.hidden) {}

  void initialize(std::size_t dim, std::size_t n_classes);
  FitResult fit(const Matrix& X, std::span<const int> y, std::size_t n_classes,
                const Matrix* X_val = nullptr, std::span<const int> y_val = {});

  double objective(const Matrix& X, std::span<const int> y, std::span<const std::size_t> rows,
                   std::span<double> grad) const override;

  ClassifierKind kind() const override { return ClassifierKind::kMlp; }
  std::size_t n_classes() const override { return n_classes_; }
  std::size_t input_dim() const override { return dim_; }
  std::size_t hidden() const { return hidden_; }
  ProbMatrix predict_proba(const Matrix& X) const override;
  Hyperparameters hyperparameters() const override;
  ParameterBlobs parameter_blobs() const override;

  static std::unique_ptr<MlpClassifier> restore(const Hyperparameters& h, const ParameterBlobs& b);

 private:
  // Logits for one row; hidden activations written to `h`.
  void forward_row(std::span<const double> x, std::span<double> h, std::span<double> z) const;

  std::size_t hidden_;
  std::size_t dim_ = 0;
  std::size_t n_classes_ = 0;
};

}  // namespace malvis
