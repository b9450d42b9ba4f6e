/* Copyright (c) 2026 The SANet-cpp Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "sanet/pinwheel.hpp"
#include "test_util.hpp"

using namespace sanet;
using namespace sanet::testing;

namespace {

PinwheelConv<double> build(std::size_t in, std::size_t out, std::size_t k,
                           std::uint64_t seed = 7) {
  Initializer init(seed);
  return PinwheelConv<double>::make(init, in, out, k);
}

void set_identity_fuse(const PinwheelConv<double>& p) {
  Tensor<double>& w = p.fuse.weight.mutable_value();
  w.fill(0.0);
  for (std::size_t c = 0; c < p.out_channels; ++c) w.at(c, c, 0, 0) = 1.0;
}

// Channels [q*b, q*(b+1)) of y.
Tensor<double> quarter(const Tensor<double>& y, std::size_t b) {
  const std::size_t q = y.dim(1) / 4;
  Tensor<double> out({y.dim(0), q, y.dim(2), y.dim(3)});
  for (std::size_t n = 0; n < y.dim(0); ++n)
    for (std::size_t c = 0; c < q; ++c)
      for (std::size_t i = 0; i < y.dim(2); ++i)
        for (std::size_t j = 0; j < y.dim(3); ++j) out.at(n, c, i, j) = y.at(n, b * q + c, i, j);
  return out;
}

}  // namespace

TEST_CASE("pinwheel: spatial shape is preserved") {
  for (std::size_t k : {3u, 5u}) {
    auto p = build(2, 4, k);
    for (std::size_t h = 4; h <= 16; ++h) {
      for (std::size_t w = 4; w <= 16; w += 3) {
        TapeD tape;
        std::mt19937_64 rng(h * 31 + w);
        auto y = pinwheel_forward(tape, cst(oracle::random_tensor({1, 2, h, w}, rng)), p);
        CHECK(y.shape() == Shape{1, 4, h, w});
      }
    }
  }
}

TEST_CASE("pinwheel: zero input with zero biases gives zero output") {
  auto p = build(3, 8, 3);
  TapeD tape;
  auto y = pinwheel_forward(tape, cst(Tensor<double>({2, 3, 6, 6})), p);
  CHECK(y.value() == Tensor<double>({2, 8, 6, 6}));
}

TEST_CASE("pinwheel: impulse response is a one-sided strip per branch") {
  for (std::size_t k : {3u, 5u}) {
    auto p = build(1, 4, k, 11);
    set_identity_fuse(p);
    std::mt19937_64 rng(k);
    // Strictly positive weights so the support of each response is exact.
    for (const Conv<double>* c : {&p.hl, &p.hr, &p.vt, &p.vb}) randomize(c->weight, rng, 0.1, 1.0);

    const std::size_t r = 5, col = 6;
    Tensor<double> x({1, 1, 11, 12});
    x.at(0, 0, r, col) = 1.0;
    TapeD tape;
    const Tensor<double> y = pinwheel_forward(tape, cst(x), p).value();

    const Conv<double>* branch[4] = {&p.hl, &p.hr, &p.vt, &p.vb};
    for (std::size_t b = 0; b < 4; ++b) {
      const Tensor<double> got = quarter(y, b);
      const Tensor<double>& w = branch[b]->weight.value();
      const Tensor<double> want = oracle::conv2d(x, w, nullptr, 1, branch[b]->opt.pad);
      CHECK(max_abs_diff(got, want) <= 1e-12);

      const long rr = static_cast<long>(r), cc = static_cast<long>(col), kk = static_cast<long>(k);
      for (long i = 0; i < 11; ++i) {
        for (long j = 0; j < 12; ++j) {
          bool inside = false;
          switch (b) {
            case 0: inside = i == rr && j >= cc && j < cc + kk; break;
            case 1: inside = i == rr && j > cc - kk && j <= cc; break;
            case 2: inside = j == cc && i >= rr && i < rr + kk; break;
            case 3: inside = j == cc && i > rr - kk && i <= rr; break;
          }
          const double v = got.at(0, 0, static_cast<std::size_t>(i), static_cast<std::size_t>(j));
          if (inside) {
            CHECK(v > 0.0);
          } else {
            CHECK(v == 0.0);
          }
        }
      }
    }
  }
}

TEST_CASE("pinwheel: horizontal and vertical lines excite matching branches") {
  auto p = build(1, 4, 3);
  set_identity_fuse(p);
  for (const Conv<double>* c : {&p.hl, &p.hr, &p.vt, &p.vb}) fill(c->weight, 1.0);

  auto energy = [&](const Tensor<double>& x, std::size_t b0, std::size_t b1) {
    TapeD tape;
    const Tensor<double> y = pinwheel_forward(tape, cst(x), p).value();
    double s = 0;
    for (std::size_t b : {b0, b1}) {
      const Tensor<double> part = quarter(y, b);
      for (double v : part.values()) s += std::abs(v);
    }
    return s;
  };

  // Lines on a zero-mean background. With equal all-positive weights every
  // branch moves the same total mass, so a non-negative image cannot tell
  // the directions apart.
  Tensor<double> hline({1, 1, 9, 9}, -1.0 / 9.0), vline({1, 1, 9, 9}, -1.0 / 9.0);
  for (std::size_t j = 0; j < 9; ++j) hline.at(0, 0, 4, j) = 8.0 / 9.0;
  for (std::size_t i = 0; i < 9; ++i) vline.at(0, 0, i, 4) = 8.0 / 9.0;
  CHECK(energy(hline, 0, 1) > energy(hline, 2, 3));
  CHECK(energy(vline, 2, 3) > energy(vline, 0, 1));
}

TEST_CASE("pinwheel: parameter count is in*out*k + out + out^2") {
  struct Case { std::size_t in, out, k; };
  for (Case c : {Case{1, 16, 3}, Case{16, 16, 5}, Case{16, 32, 3}, Case{64, 128, 5}}) {
    auto p = build(c.in, c.out, c.k);
    CHECK(p.param_count() == c.in * c.out * c.k + c.out + c.out * c.out);
    ParamRegistry<double> reg;
    p.register_params(reg, "pconv");
    CHECK(reg.trainable_count() == p.param_count());
    CHECK(reg.find("pconv.hl.w") != nullptr);
    CHECK(reg.find("pconv.vb.b") != nullptr);
    CHECK(reg.find("pconv.fuse.w") != nullptr);
    CHECK(reg.find("pconv.fuse.b") == nullptr);
  }
  // Dense k x k conv with bias at the configured widths is larger.
  CHECK(build(16, 16, 3).param_count() < 16 * 16 * 9 + 16);
  CHECK(build(16, 16, 5).param_count() < 16 * 16 * 25 + 16);
}

TEST_CASE("pinwheel: construction and input errors") {
  Initializer init(1);
  CHECK_THROWS_AS(PinwheelConv<double>::make(init, 2, 6, 3), std::invalid_argument);
  CHECK_THROWS_AS(PinwheelConv<double>::make(init, 2, 0, 3), std::invalid_argument);
  CHECK_THROWS_AS(PinwheelConv<double>::make(init, 2, 8, 4), std::invalid_argument);
  auto p = build(2, 4, 3);
  TapeD tape;
  CHECK_THROWS_AS(pinwheel_forward(tape, cst(Tensor<double>({1, 3, 5, 5})), p), ShapeError);
}

TEST_CASE("pinwheel: gradcheck over input and every parameter") {
  for (std::size_t k : {3u, 5u}) {
    auto p = build(3, 8, k, 21 + k);
    std::mt19937_64 rng(k);
    for (const Conv<double>* c : {&p.hl, &p.hr, &p.vt, &p.vb}) randomize(c->bias, rng);
    ParamRegistry<double> reg;
    p.register_params(reg, "pconv");
    auto x = VarD::leaf(oracle::random_tensor({2, 3, 6, 5}, rng), true);
    auto inputs = trainable_inputs(reg);
    inputs.push_back({"x", x});
    auto rep = gradcheck(
        [&](TapeD& tape) { return weighted_sum(tape, pinwheel_forward(tape, x, p), 3); },
        inputs);
    INFO(rep.worst_input << "[" << rep.worst_index << "] " << rep.worst_rel_error);
    CHECK(rep.passed);
    CHECK(rep.worst_rel_error <= 1e-4);
  }
}
