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


#include "malvis/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "json.hpp"
#include "malvis/error.hpp"
#include "malvis/evaluate.hpp"
#include "malvis/parallel.hpp"

namespace malvis {

std::string_view metric_name(EnsembleMetric metric) {
  switch (metric) {
    case EnsembleMetric::kAccuracy: return "accuracy";
    case EnsembleMetric::kAvgTpr: return "avg_tpr";
    case EnsembleMetric::kF1: return "f1";
    case EnsembleMetric::kAuc: return "auc";
    case EnsembleMetric::kNegAvgFpr: return "neg_avg_fpr";
  }
  return "unknown";
}

EnsembleMetric metric_from_name(std::string_view name) {
  for (auto m : {EnsembleMetric::kAccuracy, EnsembleMetric::kAvgTpr, EnsembleMetric::kF1,
                 EnsembleMetric::kAuc, EnsembleMetric::kNegAvgFpr})
    if (metric_name(m) == name) return m;
  fail("UnknownMetric", "unknown metric \"" + std::string(name) +
                            "\" (accuracy, avg_tpr, f1, auc, neg_avg_fpr)");
}

ProbMatrix combine(const ProbMatrix& p1, const ProbMatrix& p2, double alpha) {
  if (p1.n() != p2.n() || p1.c() != p2.c())
    fail("ShapeMismatch", "probability matrices are " + std::to_string(p1.n()) + "x" +
                              std::to_string(p1.c()) + " and " + std::to_string(p2.n()) + "x" +
                              std::to_string(p2.c()));
  if (!(alpha >= 0.0 && alpha <= 1.0)) fail("InvalidArgument", "alpha must lie in [0, 1]");
  if (alpha == 1.0) return p1;
  if (alpha == 0.0) return p2;
  const double beta = 1.0 - alpha;
  Matrix m(p1.n(), p1.c());
  const auto a = p1.matrix().data(), b = p2.matrix().data();
  auto out = m.data();
  // A rounding step can land one ulp above 1.
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::min(1.0, alpha * a[i] + beta * b[i]);
  return ProbMatrix(std::move(m));
}

double metric_value(EnsembleMetric metric, const ProbMatrix& probs, std::span<const int> y_true) {
  switch (metric) {
    case EnsembleMetric::kAccuracy:
    case EnsembleMetric::kAvgTpr:
    case EnsembleMetric::kNegAvgFpr: {
      const MetricsReport r = rates(confusion(y_true, probs.predictions(), probs.c()));
      if (metric == EnsembleMetric::kAccuracy) return r.accuracy;
      if (metric == EnsembleMetric::kAvgTpr) return r.avg_tpr;
      return -r.avg_fpr;
    }
    case EnsembleMetric::kF1:
      return f1_binary(confusion(y_true, probs.predictions(), probs.c()), 1);
    case EnsembleMetric::kAuc:
      if (probs.c() != 2) fail("NotBinary", "AUC metric needs 2 classes");
      return roc_auc(probs.column(1), y_true).auc;
  }
  fail("UnknownMetric", "unhandled metric");
}

CombinationResult optimize_alpha(const ProbMatrix& p1, const ProbMatrix& p2,
                                 std::span<const int> y_true, EnsembleMetric metric,
                                 double grid_step, std::size_t threads) {
  if (!(grid_step > 0.0 && grid_step <= 1.0))
    fail("InvalidArgument", "grid step must lie in (0, 1]");
  if (p1.n() != y_true.size()) fail("DimMismatch", "labels and probabilities differ in length");
  std::vector<double> alphas;
  for (std::size_t i = 0;; ++i) {
    const double a = static_cast<double>(i) * grid_step;
    // Stop short of 1 so rounding (e.g. 100 * 0.01) cannot duplicate it.
    if (a >= 1.0 - grid_step * 1e-9) break;
    alphas.push_back(a);
  }
  alphas.push_back(1.0);

  CombinationResult result;
  result.metric_name = std::string(metric_name(metric));
  result.grid_step = grid_step;
  result.curve.resize(alphas.size());
  parallel_for(alphas.size(), threads, [&](std::size_t i) {
    result.curve[i] = {alphas[i], metric_value(metric, combine(p1, p2, alphas[i]), y_true)};
  });
  std::size_t best = 0;
  for (std::size_t i = 1; i < result.curve.size(); ++i)
    if (result.curve[i].value > result.curve[best].value) best = i;
  result.alpha = result.curve[best].alpha;
  result.objective_value = result.curve[best].value;
  return result;
}

std::string combination_to_json(const CombinationResult& r) {
  nlohmann::json j;
  j["alpha"] = r.alpha;
  j["beta"] = 1.0 - r.alpha;
  j["objective_value"] = r.objective_value;
  j["metric"] = r.metric_name;
  j["grid_step"] = r.grid_step;
  auto curve = nlohmann::json::array();
  for (const auto& p : r.curve) curve.push_back({p.alpha, p.value});
  j["per_alpha_curve"] = curve;
  return j.dump(2) + "\n";
}

std::string alpha_curve_csv(const CombinationResult& r) {
  std::string out = "alpha,value\n";
  char buf[64];
  for (const auto& p : r.curve) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", p.alpha, p.value);
    out += buf;
  }
  return out;
}

}  // namespace malvis
