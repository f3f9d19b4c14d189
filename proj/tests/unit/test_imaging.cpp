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
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "malvis/error.hpp"
#include "malvis/image_store.hpp"
#include "malvis/imaging.hpp"
#include "malvis/rng.hpp"

using namespace malvis;

namespace {

// Separable reference: out = Ry * img * Rx^T with interpolation matrices built
// from half-pixel centres. Same sampling rule, different arithmetic order.
std::vector<std::vector<double>> interp_matrix(std::size_t in, std::size_t out) {
  std::vector<std::vector<double>> m(out, std::vector<double>(in, 0.0));
  for (std::size_t i = 0; i < out; ++i) {
    double pos = (static_cast<double>(i) + 0.5) * static_cast<double>(in) /
                     static_cast<double>(out) - 0.5;
    pos = std::clamp(pos, 0.0, static_cast<double>(in - 1));
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, in - 1);
    m[i][lo] += 1.0 - (pos - static_cast<double>(lo));
    m[i][hi] += pos - static_cast<double>(lo);
  }
  return m;
}

std::vector<double> reference_resize(const GrayImage& img, std::size_t side) {
  const auto ry = interp_matrix(img.height(), side);
  const auto rx = interp_matrix(img.width(), side);
  std::vector<double> out(side * side, 0.0);
  for (std::size_t r = 0; r < side; ++r)
    for (std::size_t c = 0; c < side; ++c) {
      double s = 0.0;
      for (std::size_t y = 0; y < img.height(); ++y) {
        if (ry[r][y] == 0.0) continue;
        for (std::size_t x = 0; x < img.width(); ++x) s += ry[r][y] * rx[c][x] * img.at(y, x);
      }
      out[r * side + c] = s;
    }
  return out;
}

}  // namespace

TEST_SUITE("imaging") {
  TEST_CASE("width table brackets") {
    CHECK(width_for_size(25000) == 64);
    CHECK(width_for_size(10240) == 32);
    CHECK(width_for_size(10241) == 64);
    CHECK(width_for_size(3000000) == 2048);
    CHECK(width_for_size(1) == 32);
    const std::uint64_t kb = 1024;
    CHECK(width_for_size(30 * kb) == 64);
    CHECK(width_for_size(60 * kb) == 128);
    CHECK(width_for_size(100 * kb) == 256);
    CHECK(width_for_size(200 * kb) == 384);
    CHECK(width_for_size(500 * kb) == 512);
    CHECK(width_for_size(1000 * kb) == 768);
    CHECK(width_for_size(2000 * kb) == 1024);
    CHECK(width_for_size(2000 * kb + 1) == 2048);
  }

  TEST_CASE("width is monotone in size") {
    std::size_t prev = 0;
    for (std::uint64_t n = 1; n < 3'000'000; n += 997) {
      const std::size_t w = width_for_size(n);
      CHECK(w >= prev);
      prev = w;
    }
  }

  TEST_CASE("bytes to gray: 25000 bytes of 0xFF") {
    const std::vector<std::uint8_t> b(25000, 0xFF);
    const GrayImage g = bytes_to_gray(b);
    CHECK(g.width() == 64);
    CHECK(g.height() == 391);
    const auto px = g.pixels();
    CHECK(std::all_of(px.begin(), px.begin() + 25000, [](double v) { return v == 1.0; }));
    CHECK(std::all_of(px.begin() + 25000, px.end(), [](double v) { return v == 0.0; }));
    CHECK(px.size() - 25000 == 24);
  }

  TEST_CASE("bytes to gray: small inputs") {
    const GrayImage zeros = bytes_to_gray(std::vector<std::uint8_t>(32, 0));
    CHECK(zeros.height() == 1);
    CHECK(zeros.width() == 32);
    CHECK(std::ranges::all_of(zeros.pixels(), [](double v) { return v == 0.0; }));

    const GrayImage one = bytes_to_gray(std::vector<std::uint8_t>{0x80});
    CHECK(one.height() == 1);
    CHECK(one.width() == 32);
    CHECK(one.at(0, 0) == 128.0 / 255.0);
    for (std::size_t c = 1; c < 32; ++c) CHECK(one.at(0, c) == 0.0);

    CHECK_THROWS_AS(bytes_to_gray(std::vector<std::uint8_t>{}), Error);
  }

  TEST_CASE("padding is minimal and pixels stay in range") {
    Rng rng(3);
    for (int t = 0; t < 40; ++t) {
      const std::size_t n = 1 + rng.below(300000);
      std::vector<std::uint8_t> b(n);
      for (auto& v : b) v = static_cast<std::uint8_t>(rng.below(256));
      const GrayImage g = bytes_to_gray(b);
      CHECK(g.height() * g.width() >= n);
      CHECK((g.height() - 1) * g.width() < n);
      for (std::size_t i = 0; i < n; ++i) REQUIRE(g.pixels()[i] == b[i] / 255.0);
      CHECK(bytes_to_gray(b) == g);
    }
  }

  TEST_CASE("resize of a constant image is constant") {
    const GrayImage g(37, 64, std::vector<double>(37 * 64, 0.5));
    const SquareImage s = resize_bilinear(g, 224);
    CHECK(std::ranges::all_of(s.pixels(), [](double v) { return v == 0.5; }));
    const SquareImage t = to_small(g);
    CHECK(t.side() == 28);
    CHECK(std::ranges::all_of(t.pixels(), [](double v) { return v == 0.5; }));
  }

  TEST_CASE("resize to the same side is the identity") {
    Rng rng(5);
    std::vector<double> px(28 * 28);
    for (double& v : px) v = rng.uniform();
    const GrayImage g(28, 28, px);
    CHECK(std::ranges::equal(resize_bilinear(g, 28).pixels(), px));
    CHECK(std::ranges::equal(to_small(g).pixels(), px));
  }

  TEST_CASE("2x2 to 4x4 against the reference interpolation") {
    const GrayImage g(2, 2, {0.0, 1.0, 0.0, 1.0});
    const SquareImage s = resize_bilinear(g, 4);
    const auto ref = reference_resize(g, 4);
    // Every row is the column ramp 0, 1/4, 3/4, 1.
    const double ramp[] = {0.0, 0.25, 0.75, 1.0};
    for (std::size_t r = 0; r < 4; ++r)
      for (std::size_t c = 0; c < 4; ++c) {
        CHECK(s.at(r, c) == doctest::Approx(ref[r * 4 + c]).epsilon(1e-12));
        CHECK(s.at(r, c) == doctest::Approx(ramp[c]).epsilon(1e-12));
      }
  }

  TEST_CASE("391x64 to 28x28 against the reference interpolation") {
    Rng rng(9);
    std::vector<std::uint8_t> b(25000);
    for (auto& v : b) v = static_cast<std::uint8_t>(rng.below(256));
    const GrayImage g = bytes_to_gray(b);
    REQUIRE(g.height() == 391);
    const SquareImage s = to_small(g);
    const auto ref = reference_resize(g, 28);
    for (std::size_t i = 0; i < ref.size(); ++i)
      CHECK(s.pixels()[i] == doctest::Approx(ref[i]).epsilon(1e-12));
  }

  TEST_CASE("resize keeps values in [0,1]") {
    Rng rng(11);
    for (int t = 0; t < 20; ++t) {
      const std::size_t h = 1 + rng.below(300), w = 1 + rng.below(300);
      std::vector<double> px(h * w);
      for (double& v : px) v = rng.uniform() < 0.5 ? 0.0 : 1.0;
      const SquareImage s = resize_bilinear(GrayImage(h, w, px), 1 + rng.below(100));
      CHECK(std::ranges::all_of(s.pixels(), [](double v) { return v >= 0.0 && v <= 1.0; }));
    }
  }

  TEST_CASE("channel replication") {
    SquareImage img(5);
    img.at(0, 0) = 0.3;
    img.at(4, 2) = 0.9;
    const RgbTensor t = replicate_channels(img);
    for (std::size_t ch = 0; ch < 3; ++ch) {
      CHECK(t.at(0, 0, ch) == 0.3);
      CHECK(t.channel(ch) == img);
    }
    const RgbTensor z = replicate_channels(SquareImage(4));
    CHECK(std::ranges::all_of(z.data(), [](double v) { return v == 0.0; }));
  }

  TEST_CASE("image store round trip and corruption") {
    ImageStore store;
    Rng rng(13);
    for (int i = 0; i < 4; ++i) {
      SquareImage img(8);
      for (double& v : img.pixels()) v = rng.uniform();
      store.add(i == 3 ? make_record("rgb", replicate_channels(img))
                       : make_record("id" + std::to_string(i), img));
    }
    const auto bytes = encode_image_store(store);
    CHECK(decode_image_store(bytes) == store);
    CHECK(encode_image_store(decode_image_store(bytes)) == bytes);
    CHECK(store.at(3).channels == 3);
    CHECK(store.find("id1") != nullptr);
    CHECK(store.find("nope") == nullptr);

    auto bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(decode_image_store(bad), Error);
    const std::vector<std::uint8_t> cut(bytes.begin(), bytes.end() - 3);
    try {
      decode_image_store(cut);
      FAIL("truncated store accepted");
    } catch (const Error& e) {
      CHECK(e.kind() == "TruncatedFile");
      CHECK(e.code() == ErrorCode::kData);
    }
  }
}
