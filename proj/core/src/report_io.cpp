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

#include <cmath>
#include <cstdio>
#include <limits>

#include "json.hpp"
#include "malvis/binio.hpp"
#include "malvis/csv.hpp"
#include "malvis/error.hpp"
#include "malvis/evaluate.hpp"

namespace malvis {

using nlohmann::json;

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// NaN (undefined rate) is written as null.
json nullable(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

double from_nullable(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

std::vector<double> from_nullable_array(const json& j) {
  std::vector<double> out;
  for (const auto& v : j) out.push_back(from_nullable(v));
  return out;
}

}  // namespace

std::string report_to_json(const MetricsReport& r) {
  json j;
  j["label_names"] = r.label_names;
  j["n_classes"] = r.confusion.n_classes();
  j["n_samples"] = r.confusion.total();
  j["accuracy"] = nullable(r.accuracy);
  j["avg_fpr"] = nullable(r.avg_fpr);
  j["avg_tpr"] = nullable(r.avg_tpr);
  json fpr = json::array(), tpr = json::array();
  for (double v : r.per_class_fpr) fpr.push_back(nullable(v));
  for (double v : r.per_class_tpr) tpr.push_back(nullable(v));
  j["per_class"] = {{"fpr", fpr}, {"tpr", tpr}, {"support", r.support}};
  j["excluded_classes"] = r.excluded_classes;
  j["positive_class"] = r.positive_class ? json(*r.positive_class) : json(nullptr);
  j["f1"] = r.f1 ? json(*r.f1) : json(nullptr);
  j["auc"] = r.auc ? json(*r.auc) : json(nullptr);
  if (r.roc_points.empty()) {
    j["roc_points"] = nullptr;
  } else {
    json pts = json::array();
    for (const auto& p : r.roc_points)
      pts.push_back({std::isinf(p.threshold) ? json(nullptr) : json(p.threshold), p.fpr, p.tpr});
    j["roc_points"] = pts;
  }
  json cm = json::array();
  for (std::size_t i = 0; i < r.confusion.n_classes(); ++i) {
    json row = json::array();
    for (std::size_t k = 0; k < r.confusion.n_classes(); ++k) row.push_back(r.confusion.at(i, k));
    cm.push_back(row);
  }
  j["confusion"] = cm;
  return j.dump(2) + "\n";
}

MetricsReport report_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    MetricsReport r;
    r.label_names = j.at("label_names").get<std::vector<std::string>>();
    const std::size_t n = j.at("n_classes").get<std::size_t>();
    r.confusion = ConfusionMatrix(n);
    const auto& cm = j.at("confusion");
    if (cm.size() != n) fail("DimMismatch", "report confusion matrix has wrong row count");
    for (std::size_t i = 0; i < n; ++i) {
      if (cm[i].size() != n) fail("DimMismatch", "report confusion row has wrong length");
      for (std::size_t k = 0; k < n; ++k) r.confusion.at(i, k) = cm[i][k].get<std::uint64_t>();
    }
    r.accuracy = from_nullable(j.at("accuracy"));
    r.avg_fpr = from_nullable(j.at("avg_fpr"));
    r.avg_tpr = from_nullable(j.at("avg_tpr"));
    r.per_class_fpr = from_nullable_array(j.at("per_class").at("fpr"));
    r.per_class_tpr = from_nullable_array(j.at("per_class").at("tpr"));
    r.support = j.at("per_class").at("support").get<std::vector<std::uint64_t>>();
    r.excluded_classes = j.at("excluded_classes").get<std::vector<int>>();
    if (!j.at("positive_class").is_null()) r.positive_class = j["positive_class"].get<int>();
    if (!j.at("f1").is_null()) r.f1 = j["f1"].get<double>();
    if (!j.at("auc").is_null()) r.auc = j["auc"].get<double>();
    if (!j.at("roc_points").is_null()) {
      for (const auto& p : j["roc_points"]) {
        const double t =
            p.at(0).is_null() ? std::numeric_limits<double>::infinity() : p[0].get<double>();
        r.roc_points.push_back({t, p.at(1).get<double>(), p.at(2).get<double>()});
      }
    }
    return r;
  } catch (const json::exception& e) {
    fail("BadFormat", std::string("metrics report: ") + e.what());
  }
}

std::string report_to_csv(const MetricsReport& r) {
  std::string out = "metric,class,value\n";
  auto line = [&](const std::string& metric, const std::string& cls, const std::string& value) {
    out += csv::join({metric, cls, value}) + "\n";
  };
  auto name = [&](std::size_t i) {
    return i < r.label_names.size() ? r.label_names[i] : std::to_string(i);
  };
  line("accuracy", "", num(r.accuracy));
  line("avg_fpr", "", num(r.avg_fpr));
  line("avg_tpr", "", num(r.avg_tpr));
  if (r.f1) line("f1", name(static_cast<std::size_t>(r.positive_class.value_or(1))), num(*r.f1));
  if (r.auc) line("auc", name(static_cast<std::size_t>(r.positive_class.value_or(1))), num(*r.auc));
  for (std::size_t i = 0; i < r.per_class_fpr.size(); ++i) {
    line("fpr", name(i), num(r.per_class_fpr[i]));
    line("tpr", name(i), num(r.per_class_tpr[i]));
    line("support", name(i), std::to_string(r.support[i]));
  }
  return out;
}

void write_report(const MetricsReport& report, const std::filesystem::path& path,
                  ReportFormat format) {
  write_text_file(path, format == ReportFormat::kJson ? report_to_json(report)
                                                      : report_to_csv(report));
}

MetricsReport read_report(const std::filesystem::path& json_path) {
  return report_from_json(read_text_file(json_path));
}

std::string roc_to_csv(std::span<const RocPoint> points) {
  std::string out = "threshold,fpr,tpr\n";
  for (const auto& p : points) out += num(p.threshold) + "," + num(p.fpr) + "," + num(p.tpr) + "\n";
  return out;
}

}  // namespace malvis
