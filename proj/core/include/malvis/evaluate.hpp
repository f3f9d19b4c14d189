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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "malvis/prob_matrix.hpp"

namespace malvis {

// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t n_classes)
      : n_(n_classes), counts_(n_classes * n_classes, 0) {}

  std::size_t n_classes() const { return n_; }
  std::uint64_t at(std::size_t truth, std::size_t pred) const { return counts_[truth * n_ + pred]; }
  std::uint64_t& at(std::size_t truth, std::size_t pred) { return counts_[truth * n_ + pred]; }
  std::uint64_t row_sum(std::size_t i) const;
  std::uint64_t col_sum(std::size_t j) const;
  std::uint64_t total() const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t n_;
  std::vector<std::uint64_t> counts_;
};

// Throws LabelOutOfRange or DimMismatch.
ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred,
                          std::size_t n_classes);

struct RocPoint {
  double threshold;  // scores >= threshold count as positive; +inf for (0, 0)
  double fpr;
  double tpr;

  friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
};

struct MetricsReport {
  std::vector<std::string> label_names;
  ConfusionMatrix confusion{0};
  double accuracy = 0.0;
  // fpr_i = (column i sum - diagonal) / (total - row i sum) and
  // tpr_i = diagonal / row i sum. NaN where the denominator is zero.
  std::vector<double> per_class_fpr;
  std::vector<double> per_class_tpr;
  std::vector<std::uint64_t> support;
  // Classes without test samples; left out of both averages.
  std::vector<int> excluded_classes;
  double avg_fpr = 0.0;
  double avg_tpr = 0.0;
  std::optional<int> positive_class;
  std::optional<double> f1;
  std::optional<double> auc;
  std::vector<RocPoint> roc_points;  // empty when not computed

  friend bool operator==(const MetricsReport& a, const MetricsReport& b);
};

// Accuracy and per-class and average FPR/TPR. Every value is the correctly
// rounded double of the exact rational it stands for (averages fall back to
// floating point only if the exact form overflows 128-bit integers).
MetricsReport rates(const ConfusionMatrix& cm);

// 2PR / (P + R) for positive_class, 0 when P + R = 0. Throws NotBinary.
double f1_binary(const ConfusionMatrix& cm, int positive_class);

// Threshold sweep over the distinct scores (descending) and trapezoid AUC.
// The area is accumulated in integers, so it equals the probability that a
// random positive outscores a random negative (ties counting one half).
// y_true entries must be 0 or 1; throws SingleClass if one is absent.
RocCurve roc_auc(std::span<const double> scores, std::span<const int> y_true);

// Confusion, rates and, for two classes, F1 and ROC/AUC on the scores of
// positive_class.
MetricsReport evaluate_probs(const ProbMatrix& probs, std::span<const int> y_true,
                             std::vector<std::string> label_names, int positive_class = 1);

enum class ReportFormat { kJson, kCsv };

std::string report_to_json(const MetricsReport& report);
MetricsReport report_from_json(const std::string& text);
// Long form with header "metric,class,value".
std::string report_to_csv(const MetricsReport& report);
void write_report(const MetricsReport& report, const std::filesystem::path& path,
                  ReportFormat format);
MetricsReport read_report(const std::filesystem::path& json_path);

// "threshold,fpr,tpr"
std::string roc_to_csv(std::span<const RocPoint> points);

}  // namespace malvis
