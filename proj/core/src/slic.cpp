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
#include <limits>
#include <vector>

#include "malvis/error.hpp"
#include "malvis/interpret.hpp"

namespace malvis {

namespace {

constexpr double kIntensityScale = 100.0;

struct Center {
  double y, x, v;
};

// Flood fill of 4-connected components. Returns component ids per pixel and
// the pixel count of each component.
std::vector<int> components(const std::vector<int>& labels, std::size_t side,
                            std::vector<std::size_t>& sizes) {
  const std::size_t n = labels.size();
  std::vector<int> comp(n, -1);
  std::vector<std::size_t> stack;
  sizes.clear();
  for (std::size_t start = 0; start < n; ++start) {
    if (comp[start] >= 0) continue;
    const int id = static_cast<int>(sizes.size());
    std::size_t count = 0;
    comp[start] = id;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      ++count;
      const std::size_t r = p / side, c = p % side;
      const std::size_t nb[4] = {r > 0 ? p - side : n, r + 1 < side ? p + side : n,
                                 c > 0 ? p - 1 : n, c + 1 < side ? p + 1 : n};
      for (std::size_t q : nb) {
        if (q < n && comp[q] < 0 && labels[q] == labels[p]) {
          comp[q] = id;
          stack.push_back(q);
        }
      }
    }
    sizes.push_back(count);
  }
  return comp;
}

// Every label keeps its largest component (first in scan order on ties);
// other components join the adjacent segment with the most pixels.
void enforce_connectivity(std::vector<int>& labels, std::size_t side) {
  std::vector<std::size_t> comp_size;
  const std::vector<int> comp = components(labels, side, comp_size);
  const std::size_t n_comp = comp_size.size();
  std::vector<int> comp_label(n_comp);
  for (std::size_t p = 0; p < labels.size(); ++p) comp_label[comp[p]] = labels[p];

  int max_label = 0;
  for (int l : labels) max_label = std::max(max_label, l);
  std::vector<int> keeper(max_label + 1, -1);
  for (std::size_t c = 0; c < n_comp; ++c) {
    int& k = keeper[comp_label[c]];
    if (k < 0 || comp_size[c] > comp_size[k]) k = static_cast<int>(c);
  }

  std::vector<std::vector<int>> adjacent(n_comp);
  for (std::size_t p = 0; p < labels.size(); ++p) {
    const std::size_t r = p / side, c = p % side;
    if (c + 1 < side && comp[p] != comp[p + 1]) {
      adjacent[comp[p]].push_back(comp[p + 1]);
      adjacent[comp[p + 1]].push_back(comp[p]);
    }
    if (r + 1 < side && comp[p] != comp[p + side]) {
      adjacent[comp[p]].push_back(comp[p + side]);
      adjacent[comp[p + side]].push_back(comp[p]);
    }
  }

  std::vector<std::size_t> label_size(max_label + 1, 0);
  std::vector<bool> resolved(n_comp, false);
  for (int l = 0; l <= max_label; ++l) {
    if (keeper[l] >= 0) {
      resolved[keeper[l]] = true;
      label_size[l] = comp_size[keeper[l]];
    }
  }
  bool pending = true;
  while (pending) {
    pending = false;
    for (std::size_t c = 0; c < n_comp; ++c) {
      if (resolved[c]) continue;
      int best = -1;
      for (int a : adjacent[c]) {
        if (!resolved[a]) continue;
        const int l = comp_label[a];
        if (best < 0 || label_size[l] > label_size[best] ||
            (label_size[l] == label_size[best] && l < best))
          best = l;
      }
      if (best < 0) {
        pending = true;
        continue;
      }
      comp_label[c] = best;
      label_size[best] += comp_size[c];
      resolved[c] = true;
    }
  }
  for (std::size_t p = 0; p < labels.size(); ++p) labels[p] = comp_label[comp[p]];
}

}  // namespace

Segmentation slic_segment(const SquareImage& img, const SlicOptions& options) {
  const std::size_t m = img.side();
  const std::size_t N = m * m;
  if (options.n_segments < 1 || options.n_segments > N)
    fail("InvalidArgument", "superpixel count must be in [1, " + std::to_string(N) + "]");
  if (options.compactness <= 0) fail("InvalidArgument", "compactness must be positive");

  const auto nx = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(options.n_segments))));
  const std::size_t ny = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(static_cast<double>(options.n_segments) / nx)));
  const double cell_w = static_cast<double>(m) / static_cast<double>(nx);
  const double cell_h = static_cast<double>(m) / static_cast<double>(ny);
  const double S = std::sqrt(static_cast<double>(N) / static_cast<double>(nx * ny));
  const double spatial = (options.compactness / S) * (options.compactness / S);
  auto value = [&](std::size_t r, std::size_t c) { return kIntensityScale * img.at(r, c); };

  // Grid seeds; the initial labels are the grid cells.
  std::vector<Center> centers;
  for (std::size_t i = 0; i < ny; ++i)
    for (std::size_t j = 0; j < nx; ++j) {
      const double cy = (static_cast<double>(i) + 0.5) * cell_h;
      const double cx = (static_cast<double>(j) + 0.5) * cell_w;
      const auto r = std::min(m - 1, static_cast<std::size_t>(cy));
      const auto c = std::min(m - 1, static_cast<std::size_t>(cx));
      centers.push_back({static_cast<double>(r), static_cast<double>(c), value(r, c)});
    }
  // Nudge each seed to the lowest-gradient pixel of its 3x3 neighbourhood.
  auto gradient = [&](std::size_t r, std::size_t c) {
    if (r == 0 || c == 0 || r + 1 >= m || c + 1 >= m) return std::numeric_limits<double>::infinity();
    const double gx = value(r, c + 1) - value(r, c - 1);
    const double gy = value(r + 1, c) - value(r - 1, c);
    return gx * gx + gy * gy;
  };
  for (auto& ctr : centers) {
    const auto r0 = static_cast<std::size_t>(ctr.y), c0 = static_cast<std::size_t>(ctr.x);
    std::size_t br = r0, bc = c0;
    double bg = gradient(r0, c0);
    for (std::size_t r = r0 ? r0 - 1 : 0; r <= std::min(m - 1, r0 + 1); ++r)
      for (std::size_t c = c0 ? c0 - 1 : 0; c <= std::min(m - 1, c0 + 1); ++c)
        if (gradient(r, c) < bg) {
          bg = gradient(r, c);
          br = r;
          bc = c;
        }
    ctr = {static_cast<double>(br), static_cast<double>(bc), value(br, bc)};
  }

  std::vector<int> labels(N);
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c < m; ++c) {
      const auto i = std::min(ny - 1, static_cast<std::size_t>(static_cast<double>(r) / cell_h));
      const auto j = std::min(nx - 1, static_cast<std::size_t>(static_cast<double>(c) / cell_w));
      labels[r * m + c] = static_cast<int>(i * nx + j);
    }

  std::vector<double> dist(N);
  const auto reach = static_cast<std::ptrdiff_t>(std::ceil(S));
  const auto mi = static_cast<std::ptrdiff_t>(m);
  for (int it = 0; it < options.iterations; ++it) {
    std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
    for (std::size_t k = 0; k < centers.size(); ++k) {
      const Center& ctr = centers[k];
      const auto cy = static_cast<std::ptrdiff_t>(std::lround(ctr.y));
      const auto cx = static_cast<std::ptrdiff_t>(std::lround(ctr.x));
      for (std::ptrdiff_t r = std::max<std::ptrdiff_t>(0, cy - reach);
           r <= std::min(mi - 1, cy + reach); ++r) {
        for (std::ptrdiff_t c = std::max<std::ptrdiff_t>(0, cx - reach);
             c <= std::min(mi - 1, cx + reach); ++c) {
          const auto p = static_cast<std::size_t>(r * mi + c);
          const double dv = value(r, c) - ctr.v;
          const double dy = static_cast<double>(r) - ctr.y;
          const double dx = static_cast<double>(c) - ctr.x;
          const double d = dv * dv + spatial * (dy * dy + dx * dx);
          if (d < dist[p]) {
            dist[p] = d;
            labels[p] = static_cast<int>(k);
          }
        }
      }
    }
    std::vector<Center> sum(centers.size(), {0.0, 0.0, 0.0});
    std::vector<std::size_t> count(centers.size(), 0);
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c < m; ++c) {
        const auto k = static_cast<std::size_t>(labels[r * m + c]);
        sum[k].y += static_cast<double>(r);
        sum[k].x += static_cast<double>(c);
        sum[k].v += value(r, c);
        ++count[k];
      }
    for (std::size_t k = 0; k < centers.size(); ++k) {
      if (count[k] == 0) continue;
      const double inv = 1.0 / static_cast<double>(count[k]);
      centers[k] = {sum[k].y * inv, sum[k].x * inv, sum[k].v * inv};
    }
  }

  enforce_connectivity(labels, m);

  // Renumber in scan order of first appearance.
  std::vector<int> remap(centers.size(), -1);
  int next = 0;
  for (int& l : labels) {
    if (remap[l] < 0) remap[l] = next++;
    l = remap[l];
  }
  Segmentation seg;
  seg.side = m;
  seg.n_segments = static_cast<std::size_t>(next);
  seg.labels = std::move(labels);
  return seg;
}

}  // namespace malvis
