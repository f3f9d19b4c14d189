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

// Reference implementations used as test oracles. Each one is written the
// slow, obvious way and shares no code with the library routine it checks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "malvis/imaging.hpp"
#include "malvis/interpret.hpp"
#include "malvis/matrix.hpp"
#include "malvis/prob_matrix.hpp"
#include "malvis/rng.hpp"
#include "malvis/smallcnn.hpp"

namespace malvis::oracle {

using Dense2 = std::vector<std::vector<double>>;

inline Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo = -1.0,
                            double hi = 1.0) {
  Matrix m(rows, cols);
  for (double& v : m.storage()) v = rng.uniform(lo, hi);
  return m;
}

// Relative error with a 1e-6 floor on the scale: below that, central
// differences at h = 1e-5 are dominated by rounding in the loss.
inline double rel_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / scale;
}

// Central difference of f at x along coordinate i.
inline double central_diff(const std::function<double(std::span<const double>)>& f,
                           std::vector<double> x, std::size_t i, double h = 1e-5) {
  const double x0 = x[i];
  x[i] = x0 + h;
  const double up = f(x);
  x[i] = x0 - h;
  const double down = f(x);
  return (up - down) / (2.0 * h);
}

// ---- eigen decomposition -------------------------------------------------

struct EigenPairs {
  std::vector<double> values;   // descending
  Dense2 vectors;               // one per row, unit length
};

// Cyclic Jacobi rotations until the off-diagonal mass vanishes.
inline EigenPairs jacobi_eigen(Dense2 a) {
  const std::size_t n = a.size();
  Dense2 v(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0, diag = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      diag += a[p][p] * a[p][p];
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    }
    if (off <= 1e-32 * std::max(diag, 1e-300)) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto i, auto j) { return a[i][i] > a[j][j]; });
  EigenPairs out;
  for (std::size_t i : order) {
    out.values.push_back(a[i][i]);
    std::vector<double> col(n);
    for (std::size_t k = 0; k < n; ++k) col[k] = v[k][i];
    out.vectors.push_back(std::move(col));
  }
  return out;
}

// Sample covariance with the n - 1 denominator.
inline Dense2 covariance(const Matrix& X) {
  const std::size_t n = X.rows(), d = X.cols();
  std::vector<double> mean(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) mean[j] += X(i, j) / static_cast<double>(n);
  Dense2 c(d, std::vector<double>(d, 0.0));
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += (X(i, a) - mean[a]) * (X(i, b) - mean[b]);
      c[a][b] = s / static_cast<double>(n - 1);
    }
  return c;
}

// ---- convolution network ---------------------------------------------------

struct Volume {
  std::size_t c = 0, h = 0, w = 0;
  std::vector<double> v;
  double at(std::size_t ch, long y, long x) const {
    if (y < 0 || x < 0 || y >= static_cast<long>(h) || x >= static_cast<long>(w)) return 0.0;
    return v[(ch * h + static_cast<std::size_t>(y)) * w + static_cast<std::size_t>(x)];
  }
};

// Direct "same" convolution; weights [out][in][k][k] then bias [out] at p.
inline Volume naive_conv(const Volume& in, std::size_t out_ch, std::size_t k, const double* p) {
  Volume out{out_ch, in.h, in.w, std::vector<double>(out_ch * in.h * in.w)};
  const long r = static_cast<long>(k / 2);
  const double* bias = p + out_ch * in.c * k * k;
  for (std::size_t o = 0; o < out_ch; ++o)
    for (std::size_t y = 0; y < in.h; ++y)
      for (std::size_t x = 0; x < in.w; ++x) {
        double s = bias[o];
        for (std::size_t i = 0; i < in.c; ++i)
          for (long dy = -r; dy <= r; ++dy)
            for (long dx = -r; dx <= r; ++dx) {
              const double wgt = p[((o * in.c + i) * k + static_cast<std::size_t>(dy + r)) * k +
                                   static_cast<std::size_t>(dx + r)];
              s += wgt * in.at(i, static_cast<long>(y) + dy, static_cast<long>(x) + dx);
            }
        out.v[(o * in.h + y) * in.w + x] = s;
      }
  return out;
}

// Decisions taken by ReLUs (sign) and max pools (chosen index); two inputs
// with equal patterns lie on the same smooth piece of the network.
using Pattern = std::vector<std::int64_t>;

inline void naive_relu(Volume& t, Pattern* pattern = nullptr) {
  for (double& x : t.v) {
    if (pattern) pattern->push_back(x > 0.0);
    x = std::max(x, 0.0);
  }
}

// Window max over the part of the window inside the image.
inline Volume naive_pool(const Volume& in, std::size_t win, std::size_t stride, long offset,
                         Pattern* pattern = nullptr) {
  const std::size_t oh = stride == 1 ? in.h : (in.h + 1) / 2;
  const std::size_t ow = stride == 1 ? in.w : (in.w + 1) / 2;
  Volume out{in.c, oh, ow, std::vector<double>(in.c * oh * ow)};
  for (std::size_t ch = 0; ch < in.c; ++ch)
    for (std::size_t y = 0; y < oh; ++y)
      for (std::size_t x = 0; x < ow; ++x) {
        double best = -INFINITY;
        long where = -1;
        for (std::size_t dy = 0; dy < win; ++dy)
          for (std::size_t dx = 0; dx < win; ++dx) {
            const long yy = static_cast<long>(y * stride + dy) + offset;
            const long xx = static_cast<long>(x * stride + dx) + offset;
            if (yy < 0 || xx < 0 || yy >= static_cast<long>(in.h) || xx >= static_cast<long>(in.w))
              continue;
            if (in.at(ch, yy, xx) > best) {
              best = in.at(ch, yy, xx);
              where = yy * static_cast<long>(in.w) + xx;
            }
          }
        if (pattern) pattern->push_back(where);
        out.v[(ch * oh + y) * ow + x] = best;
      }
  return out;
}

// Class probabilities of the small inception network, computed from the
// parameter layout alone: stem, two blocks (1x1, 3x3, 5x5, pool->1x1 each),
// global average pool, dense. `pattern`, when given, receives the
// ReLU/pool decisions in evaluation order.
inline std::vector<double> reference_cnn(const CnnArchitecture& a, std::span<const double> params,
                                         std::span<const double> pixels,
                                         Pattern* pattern = nullptr) {
  const double* p = params.data();
  Volume x{1, a.input_side, a.input_side, {pixels.begin(), pixels.end()}};
  x = naive_conv(x, a.stem_filters, 3, p);
  p += a.stem_filters * 9 + a.stem_filters;
  naive_relu(x, pattern);
  if (a.stem_pool) x = naive_pool(x, 2, 2, 0, pattern);
  for (int b = 0; b < 2; ++b) {
    const std::size_t in = x.c;
    const std::size_t widths[] = {a.branch_1x1, a.branch_3x3, a.branch_5x5, a.branch_pool};
    const std::size_t kernels[] = {1, 3, 5, 1};
    Volume cat{0, x.h, x.w, {}};
    for (int br = 0; br < 4; ++br) {
      const Volume src = br == 3 ? naive_pool(x, 3, 1, -1, pattern) : x;
      Volume y = naive_conv(src, widths[br], kernels[br], p);
      p += widths[br] * in * kernels[br] * kernels[br] + widths[br];
      naive_relu(y, pattern);
      cat.c += y.c;
      cat.v.insert(cat.v.end(), y.v.begin(), y.v.end());
    }
    x = std::move(cat);
  }
  std::vector<double> pooled(x.c, 0.0);
  for (std::size_t ch = 0; ch < x.c; ++ch) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.h * x.w; ++i) s += x.v[ch * x.h * x.w + i];
    pooled[ch] = s / static_cast<double>(x.h * x.w);
  }
  std::vector<double> logits(a.n_classes);
  const double* bias = p + a.n_classes * x.c;
  for (std::size_t o = 0; o < a.n_classes; ++o) {
    double s = bias[o];
    for (std::size_t i = 0; i < x.c; ++i) s += p[o * x.c + i] * pooled[i];
    logits[o] = s;
  }
  const double top = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double& l : logits) z += (l = std::exp(l - top));
  for (double& l : logits) l /= z;
  return logits;
}

// ---- nearest neighbours ------------------------------------------------------

// Full scan, full sort by (distance, index).
inline std::vector<std::size_t> brute_neighbors(const Matrix& X, std::span<const double> q,
                                                std::size_t k) {
  std::vector<std::pair<double, std::size_t>> all;
  for (std::size_t i = 0; i < X.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < X.cols(); ++j) s += (q[j] - X(i, j)) * (q[j] - X(i, j));
    all.emplace_back(s, i);
  }
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(all[i].second);
  return out;
}

inline std::vector<double> brute_knn_proba(const Matrix& X, std::span<const int> y,
                                           std::size_t n_classes, std::size_t k,
                                           std::span<const double> q) {
  std::vector<std::size_t> votes(n_classes, 0);
  for (std::size_t i : brute_neighbors(X, q, k)) ++votes[static_cast<std::size_t>(y[i])];
  std::vector<double> p(n_classes);
  for (std::size_t c = 0; c < n_classes; ++c)
    p[c] = static_cast<double>(votes[c]) / static_cast<double>(k);
  return p;
}

// ---- metrics -------------------------------------------------------------------

// Probability that a random positive outscores a random negative, ties 1/2.
inline double pairwise_auc(std::span<const double> scores, std::span<const int> y) {
  double num = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < y.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) num += 1.0;
      else if (scores[i] == scores[j]) num += 0.5;
    }
  }
  return num / pairs;
}

// ---- explanations ------------------------------------------------------------------

// A two-class model whose class-1 probability is driven by one planted
// super pixel: 0.7 when all of its pixels are untouched, plus a weak 0.2
// times the fraction of untouched pixels image-wide.
struct PlantedModel {
  SquareImage original{1};
  std::vector<std::size_t> planted_pixels;

  ProbMatrix operator()(const Matrix& batch) const {
    Matrix out(batch.rows(), 2);
    const auto ref = original.pixels();
    for (std::size_t r = 0; r < batch.rows(); ++r) {
      const auto row = batch.row(r);
      bool intact = true;
      for (std::size_t i : planted_pixels) intact = intact && row[i] == ref[i];
      std::size_t same = 0;
      for (std::size_t i = 0; i < row.size(); ++i) same += row[i] == ref[i] ? 1 : 0;
      const double p1 = 0.05 + (intact ? 0.7 : 0.0) +
                        0.2 * static_cast<double>(same) / static_cast<double>(row.size());
      out(r, 0) = 1.0 - p1;
      out(r, 1) = p1;
    }
    return ProbMatrix(std::move(out));
  }
};

// Textured image (so every segment has internal variation) and a planted
// segment picked by the seed from the image's own segmentation.
struct PlantedCase {
  PlantedModel model;
  int planted = 0;
};

inline PlantedCase make_planted_case(std::size_t side, const SlicOptions& slic,
                                     std::uint64_t seed) {
  Rng rng = Rng::derive(seed, 0x91a7);
  SquareImage img(side);
  const double fx = rng.uniform(0.1, 0.5), fy = rng.uniform(0.1, 0.5);
  for (std::size_t r = 0; r < side; ++r)
    for (std::size_t c = 0; c < side; ++c)
      img.at(r, c) = std::clamp(0.5 + 0.3 * std::sin(fx * static_cast<double>(c)) *
                                          std::cos(fy * static_cast<double>(r)) +
                                    rng.uniform(-0.15, 0.15),
                                0.0, 1.0);
  const Segmentation seg = slic_segment(img, slic);
  PlantedCase out;
  out.planted = static_cast<int>(rng.below(seg.n_segments));
  out.model.original = img;
  for (std::size_t i = 0; i < seg.labels.size(); ++i)
    if (seg.labels[i] == out.planted) out.model.planted_pixels.push_back(i);
  return out;
}

}  // namespace malvis::oracle
