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


#include "malvis/interpret.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"
#include "malvis/binio.hpp"
#include "malvis/error.hpp"
#include "malvis/rng.hpp"

namespace malvis {

using nlohmann::json;

double proximity(std::span<const std::uint8_t> z, double kernel_width) {
  std::size_t on = 0;
  for (auto v : z) on += v != 0;
  // cos(z, 1) = |z| / (sqrt(|z|) sqrt(K)) for a binary z.
  const double d = (on == 0 || z.empty())
                       ? 1.0
                       : 1.0 - std::sqrt(static_cast<double>(on) / static_cast<double>(z.size()));
  return std::exp(-(d * d) / (kernel_width * kernel_width));
}

std::vector<PerturbationSample> sample_perturbations(std::size_t n_segments,
                                                     std::size_t n_samples, std::uint64_t seed,
                                                     double kernel_width) {
  if (n_samples < 1) fail("InvalidArgument", "need at least one perturbation sample");
  if (!(kernel_width > 0)) fail("InvalidArgument", "kernel width must be positive");
  Rng rng = Rng::derive(seed, 0x11fe);
  std::vector<PerturbationSample> out(n_samples);
  out[0].z.assign(n_segments, 1);
  for (std::size_t i = 1; i < n_samples; ++i) {
    out[i].z.resize(n_segments);
    for (auto& v : out[i].z) v = static_cast<std::uint8_t>(rng.next() >> 63);
  }
  for (auto& s : out) s.proximity = proximity(s.z, kernel_width);
  return out;
}

namespace {

void check_segmentation(const SquareImage& img, const Segmentation& seg) {
  if (seg.side != img.side() || seg.labels.size() != img.pixels().size())
    fail("ShapeMismatch", "segmentation is " + std::to_string(seg.side) + " pixels wide, image " +
                              std::to_string(img.side()));
}

std::vector<double> segment_means(const SquareImage& img, const Segmentation& seg) {
  std::vector<double> sum(seg.n_segments, 0.0);
  std::vector<std::size_t> count(seg.n_segments, 0);
  const auto px = img.pixels();
  for (std::size_t p = 0; p < px.size(); ++p) {
    sum[seg.labels[p]] += px[p];
    ++count[seg.labels[p]];
  }
  for (std::size_t s = 0; s < sum.size(); ++s)
    if (count[s]) sum[s] /= static_cast<double>(count[s]);
  return sum;
}

// Image with every segment replaced by its fill value.
SquareImage fill_image(const SquareImage& img, const Segmentation& seg, FillMode fill) {
  SquareImage out(img.side(), 0.0);
  if (fill == FillMode::kZero) return out;
  const std::vector<double> means = segment_means(img, seg);
  auto px = out.pixels();
  for (std::size_t p = 0; p < px.size(); ++p) px[p] = means[seg.labels[p]];
  return out;
}

void masked_into(const SquareImage& img, const SquareImage& filled, const Segmentation& seg,
                 std::span<const std::uint8_t> z, std::span<double> out) {
  const auto src = img.pixels();
  const auto alt = filled.pixels();
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = z[seg.labels[p]] ? src[p] : alt[p];
}

struct RidgeFit {
  double intercept;
  std::vector<double> coef;
};

// Weighted ridge on the columns in `cols`; w sums to one.
RidgeFit weighted_ridge(std::span<const PerturbationSample> samples, std::span<const double> w,
                        std::span<const double> y, const std::vector<std::size_t>& cols,
                        double ridge) {
  const std::size_t n = samples.size();
  const std::size_t k = cols.size();
  Eigen::VectorXd zbar = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
  double ybar = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ybar += w[i] * y[i];
    for (std::size_t j = 0; j < k; ++j) zbar[static_cast<Eigen::Index>(j)] += w[i] * samples[i].z[cols[j]];
  }
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
  Eigen::VectorXd zc(static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j)
      zc[static_cast<Eigen::Index>(j)] = samples[i].z[cols[j]] - zbar[static_cast<Eigen::Index>(j)];
    A.selfadjointView<Eigen::Lower>().rankUpdate(zc, w[i]);
    rhs += (w[i] * (y[i] - ybar)) * zc;
  }
  A = A.selfadjointView<Eigen::Lower>();
  A.diagonal().array() += ridge;
  const Eigen::VectorXd beta = A.ldlt().solve(rhs);
  RidgeFit fit;
  fit.coef.assign(beta.data(), beta.data() + beta.size());
  fit.intercept = ybar - zbar.dot(beta);
  return fit;
}

}  // namespace

SquareImage mask_apply(const SquareImage& img, const Segmentation& seg,
                       std::span<const std::uint8_t> z, FillMode fill) {
  check_segmentation(img, seg);
  if (z.size() != seg.n_segments)
    fail("ShapeMismatch", "mask has " + std::to_string(z.size()) + " entries for " +
                              std::to_string(seg.n_segments) + " segments");
  const SquareImage filled = fill_image(img, seg, fill);
  SquareImage out(img.side());
  masked_into(img, filled, seg, z, out.pixels());
  return out;
}

std::size_t Explanation::top_segment() const {
  std::size_t best = 0;
  for (std::size_t s = 1; s < weights.size(); ++s)
    if (std::abs(weights[s]) > std::abs(weights[best])) best = s;
  return best;
}

Explanation fit_surrogate(std::span<const PerturbationSample> samples,
                          std::span<const double> target, int target_class,
                          const SurrogateOptions& options) {
  if (samples.empty()) fail("InvalidArgument", "no perturbation samples");
  if (samples.size() != target.size())
    fail("DimMismatch", std::to_string(samples.size()) + " samples but " +
                            std::to_string(target.size()) + " model outputs");
  const std::size_t K = samples[0].z.size();
  for (const auto& s : samples)
    if (s.z.size() != K) fail("DimMismatch", "perturbation vectors differ in length");
  for (double v : target)
    if (!std::isfinite(v)) fail_numeric("NonFinite", "model output is not finite");

  Explanation e;
  e.target_class = target_class;
  e.used_samples = samples.size();
  e.weights.assign(K, 0.0);
  if (std::all_of(target.begin(), target.end(), [&](double v) { return v == target[0]; })) {
    e.intercept = target[0];
    e.degenerate = true;
    return e;
  }

  double total = 0.0;
  for (const auto& s : samples) total += s.proximity;
  std::vector<double> w(samples.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = samples[i].proximity / total;

  std::vector<std::size_t> cols(K);
  std::iota(cols.begin(), cols.end(), std::size_t{0});
  RidgeFit fit = weighted_ridge(samples, w, target, cols, options.ridge);
  if (options.sparsity < K) {
    std::stable_sort(cols.begin(), cols.end(), [&](std::size_t a, std::size_t b) {
      return std::abs(fit.coef[a]) > std::abs(fit.coef[b]);
    });
    cols.resize(options.sparsity);
    std::sort(cols.begin(), cols.end());
    fit = weighted_ridge(samples, w, target, cols, options.ridge);
  }
  e.intercept = fit.intercept;
  for (std::size_t j = 0; j < cols.size(); ++j) e.weights[cols[j]] = fit.coef[j];

  double ybar = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) ybar += w[i] * target[i];
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    double pred = e.intercept;
    for (std::size_t c : cols) pred += e.weights[c] * samples[i].z[c];
    ss_res += w[i] * (target[i] - pred) * (target[i] - pred);
    ss_tot += w[i] * (target[i] - ybar) * (target[i] - ybar);
  }
  e.local_fit_r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 0.0;
  return e;
}

ExplainResult explain(const ProbaFn& model, const SquareImage& img, const ExplainOptions& options) {
  if (options.top < 1) fail("InvalidArgument", "top must be at least 1");
  const std::size_t N = img.pixels().size();
  ExplainResult result;
  result.segmentation = slic_segment(img, options.slic);
  const Segmentation& seg = result.segmentation;

  Matrix single(1, N, std::vector<double>(img.pixels().begin(), img.pixels().end()));
  const ProbMatrix p0 = model(single);
  result.probabilities.assign(p0.row(0).begin(), p0.row(0).end());
  const std::size_t c = p0.c();

  const auto samples =
      sample_perturbations(seg.n_segments, options.n_samples, options.seed, options.kernel_width);
  const SquareImage filled = fill_image(img, seg, options.fill);
  Matrix outputs(samples.size(), c);
  const std::size_t bs = std::max<std::size_t>(1, options.batch_size);
  for (std::size_t start = 0; start < samples.size(); start += bs) {
    const std::size_t end = std::min(samples.size(), start + bs);
    Matrix batch(end - start, N);
    for (std::size_t i = start; i < end; ++i) masked_into(img, filled, seg, samples[i].z, batch.row(i - start));
    const ProbMatrix p = model(batch);
    if (p.n() != end - start || p.c() != c) fail("ShapeMismatch", "model returned wrong shape");
    for (std::size_t i = start; i < end; ++i)
      std::copy(p.row(i - start).begin(), p.row(i - start).end(), outputs.row(i).begin());
  }

  std::vector<std::size_t> order(c);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return result.probabilities[a] > result.probabilities[b];
  });
  order.resize(std::min(options.top, c));
  std::vector<double> column(samples.size());
  for (std::size_t cls : order) {
    for (std::size_t i = 0; i < samples.size(); ++i) column[i] = outputs(i, cls);
    result.explanations.push_back(
        fit_surrogate(samples, column, static_cast<int>(cls), options.surrogate));
  }
  return result;
}

std::vector<std::uint8_t> overlay_ppm(const SquareImage& img, const Segmentation& seg,
                                      const Explanation& explanation) {
  check_segmentation(img, seg);
  if (explanation.weights.size() != seg.n_segments)
    fail("ShapeMismatch", "explanation does not match segmentation");
  const std::size_t m = img.side();
  double wmax = 0.0;
  for (double w : explanation.weights) wmax = std::max(wmax, std::abs(w));
  constexpr double kMaxAlpha = 0.6;

  const std::string header = "P6\n" + std::to_string(m) + " " + std::to_string(m) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(header.size() + 3 * m * m);
  auto to_byte = [](double v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
  };
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < m; ++c) {
      const int l = seg.at(r, c);
      const bool boundary = (r > 0 && seg.at(r - 1, c) != l) || (r + 1 < m && seg.at(r + 1, c) != l) ||
                            (c > 0 && seg.at(r, c - 1) != l) || (c + 1 < m && seg.at(r, c + 1) != l);
      if (boundary) {
        out.insert(out.end(), {255, 0, 0});
        continue;
      }
      const double g = img.at(r, c);
      double rgb[3] = {g, g, g};
      const double w = explanation.weights[l];
      if (wmax > 0 && w != 0) {
        const double a = kMaxAlpha * std::abs(w) / wmax;
        const double tint[3] = {w < 0 ? 1.0 : 0.0, w > 0 ? 1.0 : 0.0, 0.0};
        for (int k = 0; k < 3; ++k) rgb[k] = (1 - a) * rgb[k] + a * tint[k];
      }
      out.insert(out.end(), {to_byte(rgb[0]), to_byte(rgb[1]), to_byte(rgb[2])});
    }
  }
  return out;
}

void render_overlay(const SquareImage& img, const Segmentation& seg,
                    const Explanation& explanation, const std::filesystem::path& out_path) {
  write_file_bytes(out_path, overlay_ppm(img, seg, explanation));
}

std::string explanations_to_json(const ExplainResult& result, const ExplainOptions& options,
                                 const std::vector<std::string>& label_names) {
  const json params = {{"superpixels", options.slic.n_segments},
                       {"compactness", options.slic.compactness},
                       {"slic_iterations", options.slic.iterations},
                       {"samples", options.n_samples},
                       {"kernel_width", options.kernel_width},
                       {"ridge", options.surrogate.ridge},
                       {"sparsity", options.surrogate.sparsity},
                       {"fill", options.fill == FillMode::kSegmentMean ? "segment_mean" : "zero"},
                       {"top", options.top}};
  json j;
  j["n_segments"] = result.segmentation.n_segments;
  j["probabilities"] = result.probabilities;
  j["explanations"] = json::array();
  for (const auto& e : result.explanations) {
    json x;
    x["target_class"] = e.target_class;
    const auto t = static_cast<std::size_t>(e.target_class);
    x["target_label"] = t < label_names.size() ? json(label_names[t]) : json(nullptr);
    x["intercept"] = e.intercept;
    x["weights"] = e.weights;
    x["r2"] = e.local_fit_r2;
    x["used_samples"] = e.used_samples;
    x["degenerate"] = e.degenerate;
    x["seed"] = options.seed;
    x["params"] = params;
    j["explanations"].push_back(std::move(x));
  }
  return j.dump(2) + "\n";
}

}  // namespace malvis
