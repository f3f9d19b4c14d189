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

// Local surrogate explanations over super pixels: segment the image, switch
// random subsets of segments off, score the masked images with the model and
// fit a proximity-weighted sparse linear model to the class probability.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "malvis/imaging.hpp"
#include "malvis/matrix.hpp"
#include "malvis/prob_matrix.hpp"

namespace malvis {

// Labels in [0, n_segments), row-major; every segment is nonempty and
// 4-connected.
struct Segmentation {
  std::size_t side = 0;
  std::size_t n_segments = 0;
  std::vector<int> labels;

  int at(std::size_t r, std::size_t c) const { return labels[r * side + c]; }
  friend bool operator==(const Segmentation&, const Segmentation&) = default;
};

struct SlicOptions {
  std::size_t n_segments = 200;
  double compactness = 10.0;
  int iterations = 10;
};

// SLIC on the intensity channel (scaled to 0..100). Seeds sit on a
// ceil(sqrt(K)) x round(K / ceil(sqrt(K))) grid. Stray components are
// merged into their largest neighbouring segment and labels are renumbered
// in scan order.
Segmentation slic_segment(const SquareImage& img, const SlicOptions& options = {});

inline constexpr double kDefaultKernelWidth = 0.25;

struct PerturbationSample {
  std::vector<std::uint8_t> z;  // 1 keeps the segment, 0 removes it
  double proximity = 1.0;
};

// exp(-D^2 / width^2) with D the cosine distance between z and all-ones
// (D = 1 for the zero vector).
double proximity(std::span<const std::uint8_t> z, double kernel_width = kDefaultKernelWidth);

// Sample 0 is all ones; the rest are uniform over {0,1}^K.
std::vector<PerturbationSample> sample_perturbations(std::size_t n_segments,
                                                     std::size_t n_samples, std::uint64_t seed,
                                                     double kernel_width = kDefaultKernelWidth);

enum class FillMode { kSegmentMean, kZero };

// Segments with z = 0 are replaced by their mean intensity (or zero).
// Throws ShapeMismatch.
SquareImage mask_apply(const SquareImage& img, const Segmentation& seg,
                       std::span<const std::uint8_t> z, FillMode fill = FillMode::kSegmentMean);

struct Explanation {
  int target_class = 0;
  double intercept = 0.0;
  std::vector<double> weights;  // one per segment, zero outside the selected set
  std::size_t used_samples = 0;
  double local_fit_r2 = 0.0;
  bool degenerate = false;  // model output constant over the samples

  // Index of the largest |weight|, lowest index on ties.
  std::size_t top_segment() const;
};

struct SurrogateOptions {
  std::size_t sparsity = 10;
  double ridge = 1e-3;
};

// Weighted ridge regression of `target` on z with an unpenalised intercept.
// Proximities are normalised to sum to one, the `sparsity` largest |weights|
// are kept and the model is refit on them.
Explanation fit_surrogate(std::span<const PerturbationSample> samples,
                          std::span<const double> target, int target_class,
                          const SurrogateOptions& options = {});

// Rows are flattened side x side images.
using ProbaFn = std::function<ProbMatrix(const Matrix&)>;

struct ExplainOptions {
  std::size_t top = 5;
  SlicOptions slic{};
  std::size_t n_samples = 1000;
  double kernel_width = kDefaultKernelWidth;
  SurrogateOptions surrogate{};
  FillMode fill = FillMode::kSegmentMean;
  std::uint64_t seed = 0;
  std::size_t batch_size = 64;  // masked images scored per model call
};

struct ExplainResult {
  Segmentation segmentation;
  std::vector<double> probabilities;  // model output on the unmasked image
  std::vector<Explanation> explanations;  // top classes, most probable first
};

ExplainResult explain(const ProbaFn& model, const SquareImage& img, const ExplainOptions& options);

// P6 image: segment boundaries red, positive segments tinted green and
// negative ones red with opacity proportional to |w| / max |w|.
std::vector<std::uint8_t> overlay_ppm(const SquareImage& img, const Segmentation& seg,
                                      const Explanation& explanation);
void render_overlay(const SquareImage& img, const Segmentation& seg,
                    const Explanation& explanation, const std::filesystem::path& out_path);

std::string explanations_to_json(const ExplainResult& result, const ExplainOptions& options,
                                 const std::vector<std::string>& label_names);

}  // namespace malvis
