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

#include "malvis/prob_matrix.hpp"

#include <algorithm>
#include <cmath>

#include "malvis/binio.hpp"
#include "malvis/error.hpp"

namespace malvis {

ProbMatrix::ProbMatrix(Matrix probs) : probs_(std::move(probs)) {
  for (std::size_t i = 0; i < probs_.rows(); ++i) {
    double sum = 0.0;
    for (double v : probs_.row(i)) {
      if (!(v >= 0.0 && v <= 1.0))
        fail("InvalidProbabilities", "row " + std::to_string(i) + " has entry outside [0,1]");
      sum += v;
    }
    if (std::abs(sum - 1.0) > kRowTolerance)
      fail("InvalidProbabilities", "row " + std::to_string(i) + " sums to " + std::to_string(sum));
  }
}

ProbMatrix ProbMatrix::uniform(std::size_t n, std::size_t c) {
  return ProbMatrix(Matrix(n, c, 1.0 / static_cast<double>(c)));
}

std::vector<int> ProbMatrix::predictions() const {
  std::vector<int> out(n());
  for (std::size_t i = 0; i < n(); ++i) out[i] = static_cast<int>(argmax(row(i)));
  return out;
}

std::vector<double> ProbMatrix::column(std::size_t j) const {
  std::vector<double> out(n());
  for (std::size_t i = 0; i < n(); ++i) out[i] = probs_(i, j);
  return out;
}

void softmax_inplace(std::span<double> scores) {
  if (scores.empty()) return;
  const double top = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (double& s : scores) {
    s = std::exp(s - top);
    sum += s;
  }
  for (double& s : scores) s /= sum;
}

std::vector<std::uint8_t> encode_probs(const ProbMatrix& p) {
  ByteWriter w;
  w.raw("MPRB");
  w.u32(static_cast<std::uint32_t>(p.n()));
  w.u32(static_cast<std::uint32_t>(p.c()));
  for (double v : p.matrix().data()) w.f32(static_cast<float>(v));
  return w.take();
}

ProbMatrix decode_probs(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "probability matrix");
  r.expect_magic("MPRB");
  const std::size_t n = r.u32();
  const std::size_t c = r.u32();
  if (c == 0) r.fail_at("BadFormat", "zero classes");
  r.require(n * c * 4, "probability rows");
  Matrix m(n, c);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t row_offset = r.offset();
    double sum = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      const double v = r.f32();
      if (!(v >= 0.0 && v <= 1.0))
        fail("InvalidProbabilities", "probability matrix at byte offset " +
                                         std::to_string(r.offset() - 4) + ": entry outside [0,1]");
      m(i, j) = v;
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-4)
      fail("InvalidProbabilities", "probability matrix at byte offset " +
                                       std::to_string(row_offset) + ": row " + std::to_string(i) +
                                       " is not stochastic");
    for (double& v : m.row(i)) v /= sum;
  }
  if (!r.at_end()) r.fail_at("BadFormat", "trailing bytes");
  return ProbMatrix(std::move(m));
}

void write_probs(const std::filesystem::path& path, const ProbMatrix& p) {
  write_file_bytes(path, encode_probs(p));
}

ProbMatrix read_probs(const std::filesystem::path& path) {
  return decode_probs(read_file_bytes(path));
}

}  // namespace malvis
