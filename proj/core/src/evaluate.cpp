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

#include "malvis/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "malvis/error.hpp"

namespace malvis {

namespace {

using u128 = unsigned __int128;

u128 gcd128(u128 a, u128 b) {
  while (b != 0) {
    const u128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

// Correctly rounded (nearest, ties to even) value of p / q for p <= q,
// q < 2^126.
double ratio(u128 p, u128 q) {
  if (p == 0) return 0.0;
  int e = 0;
  u128 r = p;
  while (r < q) {
    r <<= 1;
    --e;
  }
  std::uint64_t m = 0;
  for (int i = 0; i < 53; ++i) {
    m <<= 1;
    if (r >= q) {
      m |= 1;
      r -= q;
    }
    r <<= 1;
  }
  if (r > q || (r == q && (m & 1))) ++m;
  return std::ldexp(static_cast<double>(m), e - 52);
}

// Exact sum of fractions, abandoned on overflow.
class RationalMean {
 public:
  void add(std::uint64_t a, std::uint64_t b) {
    fallback_ += static_cast<double>(a) / static_cast<double>(b);
    ++count_;
    if (overflow_) return;
    const u128 g = gcd128(den_, b);
    u128 scaled_num, scaled_a, new_den;
    if (__builtin_mul_overflow(num_, b / g, &scaled_num) ||
        __builtin_mul_overflow(static_cast<u128>(a), den_ / g, &scaled_a) ||
        __builtin_mul_overflow(den_ / g, static_cast<u128>(b), &new_den) ||
        __builtin_add_overflow(scaled_num, scaled_a, &num_)) {
      overflow_ = true;
      return;
    }
    den_ = new_den;
    const u128 r = gcd128(num_, den_);
    num_ /= r;
    den_ /= r;
  }

  std::size_t count() const { return count_; }

  double mean() const {
    if (count_ == 0) return std::numeric_limits<double>::quiet_NaN();
    u128 q;
    if (!overflow_ && !__builtin_mul_overflow(den_, static_cast<u128>(count_), &q) &&
        q < (static_cast<u128>(1) << 126))
      return ratio(num_, q);
    return fallback_ / static_cast<double>(count_);
  }

 private:
  u128 num_ = 0;
  u128 den_ = 1;
  double fallback_ = 0.0;
  std::size_t count_ = 0;
  bool overflow_ = false;
};

bool same(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

bool same(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(),
                                            [](double x, double y) { return same(x, y); });
}

}  // namespace

std::uint64_t ConfusionMatrix::row_sum(std::size_t i) const {
  std::uint64_t s = 0;
  for (std::size_t j = 0; j < n_; ++j) s += at(i, j);
  return s;
}

std::uint64_t ConfusionMatrix::col_sum(std::size_t j) const {
  std::uint64_t s = 0;
  for (std::size_t i = 0; i < n_; ++i) s += at(i, j);
  return s;
}

std::uint64_t ConfusionMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred,
                          std::size_t n_classes) {
  if (y_true.size() != y_pred.size())
    fail("DimMismatch", std::to_string(y_true.size()) + " true labels vs " +
                            std::to_string(y_pred.size()) + " predictions");
  ConfusionMatrix cm(n_classes);
  const int n = static_cast<int>(n_classes);
  for (std::size_t t = 0; t < y_true.size(); ++t) {
    if (y_true[t] < 0 || y_true[t] >= n || y_pred[t] < 0 || y_pred[t] >= n)
      fail("LabelOutOfRange", "sample " + std::to_string(t) + " has label outside [0, " +
                                  std::to_string(n_classes) + ")");
    ++cm.at(static_cast<std::size_t>(y_true[t]), static_cast<std::size_t>(y_pred[t]));
  }
  return cm;
}

MetricsReport rates(const ConfusionMatrix& cm) {
  const std::size_t n = cm.n_classes();
  const std::uint64_t total = cm.total();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  MetricsReport r;
  r.confusion = cm;
  r.per_class_fpr.assign(n, nan);
  r.per_class_tpr.assign(n, nan);
  r.support.assign(n, 0);
  std::uint64_t correct = 0;
  RationalMean fpr_mean, tpr_mean;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t row = cm.row_sum(i);
    const std::uint64_t col = cm.col_sum(i);
    const std::uint64_t diag = cm.at(i, i);
    correct += diag;
    r.support[i] = row;
    if (total > row) r.per_class_fpr[i] = ratio(col - diag, total - row);
    if (row > 0) r.per_class_tpr[i] = ratio(diag, row);
    if (row == 0) {
      r.excluded_classes.push_back(static_cast<int>(i));
      continue;
    }
    tpr_mean.add(diag, row);
    if (total > row) fpr_mean.add(col - diag, total - row);
  }
  r.accuracy = total ? ratio(correct, total) : nan;
  r.avg_tpr = tpr_mean.mean();
  r.avg_fpr = fpr_mean.mean();
  return r;
}

double f1_binary(const ConfusionMatrix& cm, int positive_class) {
  if (cm.n_classes() != 2)
    fail("NotBinary", "F1 needs 2 classes, got " + std::to_string(cm.n_classes()));
  if (positive_class != 0 && positive_class != 1)
    fail("LabelOutOfRange", "positive class must be 0 or 1");
  const auto p = static_cast<std::size_t>(positive_class);
  const std::uint64_t tp = cm.at(p, p);
  const std::uint64_t fp = cm.at(1 - p, p);
  const std::uint64_t fn = cm.at(p, 1 - p);
  // 2PR / (P + R) simplifies to 2TP / (2TP + FP + FN).
  if (tp == 0) return 0.0;
  return ratio(2 * static_cast<u128>(tp), 2 * static_cast<u128>(tp) + fp + fn);
}

RocCurve roc_auc(std::span<const double> scores, std::span<const int> y_true) {
  if (scores.size() != y_true.size())
    fail("DimMismatch", "scores and labels differ in length");
  std::uint64_t pos = 0, neg = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (y_true[i] != 0 && y_true[i] != 1)
      fail("LabelOutOfRange", "ROC labels must be 0 or 1");
    if (!std::isfinite(scores[i])) fail("InvalidArgument", "non-finite score");
    (y_true[i] ? pos : neg) += 1;
  }
  if (pos == 0 || neg == 0) fail("SingleClass", "ROC needs both classes present");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  RocCurve curve;
  curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  std::uint64_t tp = 0, fp = 0;
  u128 area2 = 0;  // twice the area in units of 1 / (pos * neg)
  for (std::size_t k = 0; k < order.size();) {
    const double s = scores[order[k]];
    const std::uint64_t tp0 = tp, fp0 = fp;
    for (; k < order.size() && scores[order[k]] == s; ++k) (y_true[order[k]] ? tp : fp) += 1;
    area2 += static_cast<u128>(fp - fp0) * (tp0 + tp);
    curve.points.push_back({s, ratio(fp, neg), ratio(tp, pos)});
  }
  curve.auc = ratio(area2, 2 * static_cast<u128>(pos) * neg);
  return curve;
}

MetricsReport evaluate_probs(const ProbMatrix& probs, std::span<const int> y_true,
                             std::vector<std::string> label_names, int positive_class) {
  if (label_names.size() != probs.c())
    fail("DimMismatch", std::to_string(label_names.size()) + " label names for " +
                            std::to_string(probs.c()) + " probability columns");
  const std::vector<int> pred = probs.predictions();
  MetricsReport r = rates(confusion(y_true, pred, probs.c()));
  r.label_names = std::move(label_names);
  if (probs.c() == 2) {
    r.positive_class = positive_class;
    r.f1 = f1_binary(r.confusion, positive_class);
    std::vector<int> y01(y_true.size());
    for (std::size_t i = 0; i < y_true.size(); ++i) y01[i] = y_true[i] == positive_class;
    const bool both = std::count(y01.begin(), y01.end(), 1) > 0 &&
                      std::count(y01.begin(), y01.end(), 0) > 0;
    if (both) {
      RocCurve roc = roc_auc(probs.column(static_cast<std::size_t>(positive_class)), y01);
      r.auc = roc.auc;
      r.roc_points = std::move(roc.points);
    }
  }
  return r;
}

bool operator==(const MetricsReport& a, const MetricsReport& b) {
  auto opt_same = [](const std::optional<double>& x, const std::optional<double>& y) {
    return x.has_value() == y.has_value() && (!x || same(*x, *y));
  };
  return a.label_names == b.label_names && a.confusion == b.confusion &&
         same(a.accuracy, b.accuracy) && same(a.per_class_fpr, b.per_class_fpr) &&
         same(a.per_class_tpr, b.per_class_tpr) && a.support == b.support &&
         a.excluded_classes == b.excluded_classes && same(a.avg_fpr, b.avg_fpr) &&
         same(a.avg_tpr, b.avg_tpr) && a.positive_class == b.positive_class &&
         opt_same(a.f1, b.f1) && opt_same(a.auc, b.auc) && a.roc_points == b.roc_points;
}

}  // namespace malvis
