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
#include "sanet/safm.hpp"
#include "test_util.hpp"

using namespace sanet;
using namespace sanet::testing;

namespace {

Safm<double> build(std::size_t c, const SafmConfig& cfg = {}, std::uint64_t seed = 3) {
  Initializer init(seed);
  return Safm<double>::make(init, c, cfg);
}

Tensor<double> concat_oracle(const Tensor<double>& e, const Tensor<double>& d) {
  const std::size_t n = e.dim(0), c = e.dim(1), h = e.dim(2), w = e.dim(3);
  Tensor<double> x({n, 2 * c, h, w});
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < w; ++j) {
          x.at(b, ch, i, j) = e.at(b, ch, i, j);
          x.at(b, c + ch, i, j) = d.at(b, ch, i, j);
        }
  return x;
}

// The fusion written out directly, one pixel at a time.
Tensor<double> safm_oracle(const Tensor<double>& e, const Tensor<double>& d,
                           const Safm<double>& p) {
  const std::size_t n = e.dim(0), c = e.dim(1), h = e.dim(2), w = e.dim(3);
  const Tensor<double> x = concat_oracle(e, d);
  Tensor<double> pooled({n, 2, h, w});
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t i = 0; i < h; ++i)
      for (std::size_t j = 0; j < w; ++j) {
        double s = 0, m = -1e300;
        for (std::size_t ch = 0; ch < 2 * c; ++ch) {
          s += x.at(b, ch, i, j);
          m = std::max(m, x.at(b, ch, i, j));
        }
        pooled.at(b, 0, i, j) = s / static_cast<double>(2 * c);
        pooled.at(b, 1, i, j) = m;
      }
  const Tensor<double>& b7 = p.conv7.bias.value();
  const Tensor<double> saf = oracle::conv2d(pooled, p.conv7.weight.value(), &b7, 1, Padding::same(3));
  Tensor<double> y({n, c, h, w});
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < w; ++j) {
          const double s = saf.at(b, 0, i, j);
          y.at(b, ch, i, j) = e.at(b, ch, i, j) * oracle::sigmoid(s) +
                              d.at(b, ch, i, j) * oracle::sigmoid(1.0 - s);
        }
  const Tensor<double>& w1 = p.conv1.weight.value();
  const Tensor<double>& b1 = p.conv1.bias.value();
  const double lambda = p.lambda.value()[0];
  Tensor<double> out({n, 2 * c, h, w});
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t o = 0; o < 2 * c; ++o)
      for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < w; ++j) {
          double f = b1[o];
          for (std::size_t ch = 0; ch < c; ++ch) f += w1[o * c + ch] * y.at(b, ch, i, j);
          const double gated = f * x.at(b, o, i, j);
          out.at(b, o, i, j) = p.cfg.residual ? lambda * gated + x.at(b, o, i, j) : gated;
        }
  return out;
}

struct Pair {
  Tensor<double> e, d;
};

Pair random_pair(std::mt19937_64& rng, std::size_t c, std::size_t h, std::size_t w,
                 double scale = 1.0) {
  return {oracle::random_tensor({2, c, h, w}, rng, -scale, scale),
          oracle::random_tensor({2, c, h, w}, rng, -scale, scale)};
}

}  // namespace

TEST_CASE("safm: lambda starts at zero and zero lambda is the plain concatenation") {
  auto p = build(4);
  CHECK(p.lambda.value()[0] == 0.0);
  CHECK(p.lambda.requires_grad());
  std::mt19937_64 rng(1);
  for (int rep = 0; rep < 60; ++rep) {
    std::uniform_int_distribution<std::size_t> ext(7, 12);
    const std::size_t h = ext(rng), w = ext(rng);
    auto [e, d] = random_pair(rng, 4, h, w, 5.0);
    randomize(p.conv7.weight, rng);
    randomize(p.conv1.bias, rng);
    TapeD tape;
    auto out = safm_forward(tape, cst(e), cst(d), p);
    CHECK(out.shape() == Shape{2, 8, h, w});
    CHECK(out.value() == concat_oracle(e, d));
  }
}

TEST_CASE("safm: zero saliency map gives weights 0.5 and sigmoid(1)") {
  auto p = build(3);
  fill(p.conv7.weight, 0.0);
  fill(p.conv7.bias, 0.0);
  std::mt19937_64 rng(2);
  auto [e, d] = random_pair(rng, 3, 8, 8);
  TapeD tape;
  auto t = safm_trace(tape, cst(e), cst(d), p);
  for (double v : t.e_weight.value().values()) CHECK(v == 0.5);
  for (double v : t.d_weight.value().values()) CHECK(v == doctest::Approx(0.7310585786).epsilon(1e-9));
  for (std::size_t i = 0; i < e.size(); ++i) {
    CHECK(t.y.value()[i] == doctest::Approx(0.5 * e[i] + 0.7311 * d[i]).epsilon(1e-4));
  }
}

TEST_CASE("safm: matches a direct transcription of the fusion") {
  std::mt19937_64 rng(3);
  for (bool residual : {true, false}) {
    SafmConfig cfg;
    cfg.residual = residual;
    auto p = build(4, cfg, 9);
    fill(p.lambda, 1.0);
    for (int rep = 0; rep < 10; ++rep) {
      randomize(p.conv7.bias, rng);
      randomize(p.conv1.bias, rng);
      auto [e, d] = random_pair(rng, 4, 7, 9);
      TapeD tape;
      auto out = safm_forward(tape, cst(e), cst(d), p);
      CHECK(max_abs_diff(out.value(), safm_oracle(e, d, p)) <= 1e-6);
    }
  }
}

TEST_CASE("safm: both weights are equal exactly where the saliency is 0.5") {
  auto p = build(2);
  fill(p.conv7.weight, 0.0);
  fill(p.conv7.bias, 0.5);
  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 50; ++rep) {
    auto [e, d] = random_pair(rng, 2, 7, 7, 3.0);
    TapeD tape;
    auto t = safm_trace(tape, cst(e), cst(d), p);
    for (double s : t.saf.value().values()) REQUIRE(s == 0.5);
    CHECK(t.e_weight.value() == t.d_weight.value());
  }
}

TEST_CASE("safm: raising the saliency raises the encoder weight and lowers the decoder weight") {
  auto p = build(3, {}, 12);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> step(0.01, 2.0);
  for (int rep = 0; rep < 50; ++rep) {
    auto [e, d] = random_pair(rng, 3, 8, 7);
    randomize(p.conv7.bias, rng);
    TapeD tape;
    auto lo = safm_trace(tape, cst(e), cst(d), p);
    const double b0 = p.conv7.bias.value()[0];
    // A larger bias raises the saliency at every pixel by the same amount.
    p.conv7.bias.mutable_value()[0] = b0 + step(rng);
    auto hi = safm_trace(tape, cst(e), cst(d), p);
    for (std::size_t i = 0; i < lo.saf.size(); ++i) {
      REQUIRE(hi.saf.value()[i] > lo.saf.value()[i]);
      CHECK(hi.e_weight.value()[i] > lo.e_weight.value()[i]);
      CHECK(hi.d_weight.value()[i] < lo.d_weight.value()[i]);
    }
    p.conv7.bias.mutable_value()[0] = b0;
  }
}

TEST_CASE("safm: d out / d lambda is conv1(Y) * X") {
  auto p = build(3, {}, 4);
  std::mt19937_64 rng(6);
  randomize(p.conv1.bias, rng);
  auto [e, d] = random_pair(rng, 3, 7, 8);
  for (double lambda : {0.0, 0.6}) {
    fill(p.lambda, lambda);
    p.lambda.zero_grad();
    TapeD tape;
    auto t = safm_trace(tape, cst(e), cst(d), p);
    std::mt19937_64 wrng(77);
    const Tensor<double> r = oracle::random_tensor(t.out.shape(), wrng);
    auto loss = sum(tape, mul(tape, t.out, cst(r)));
    tape.backward(loss);

    TapeD plain;
    const Tensor<double> g = mul(plain, p.conv1(plain, t.y), t.x).value();
    double want = 0;
    for (std::size_t i = 0; i < g.size(); ++i) want += r[i] * g[i];
    CHECK(p.lambda.grad()[0] == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("safm: gradcheck including lambda") {
  for (bool residual : {true, false}) {
    SafmConfig cfg;
    cfg.residual = residual;
    auto p = build(2, cfg, 8);
    std::mt19937_64 rng(7);
    randomize(p.conv7.bias, rng);
    randomize(p.conv1.bias, rng);
    fill(p.lambda, 0.3);
    ParamRegistry<double> reg;
    p.register_params(reg, "safm");
    auto e = VarD::leaf(oracle::random_tensor({2, 2, 7, 7}, rng), true);
    auto d = VarD::leaf(oracle::random_tensor({2, 2, 7, 7}, rng), true);
    auto inputs = trainable_inputs(reg);
    inputs.push_back({"E", e});
    inputs.push_back({"D", d});
    CHECK((reg.find("safm.lambda")->trainable == residual));
    auto rep = gradcheck(
        [&](TapeD& tape) { return weighted_sum(tape, safm_forward(tape, e, d, p), 2); }, inputs);
    INFO(rep.worst_input << "[" << rep.worst_index << "] " << rep.worst_rel_error);
    CHECK(rep.passed);
  }
}

TEST_CASE("safm: ablation switches and parameter names") {
  SafmConfig fixed;
  fixed.lambda_learnable = false;
  auto p = build(4, fixed);
  CHECK(p.lambda.value()[0] == 1.0);
  CHECK_FALSE(p.lambda.requires_grad());
  ParamRegistry<double> reg;
  p.register_params(reg, "dec1.safm");
  CHECK_FALSE(reg.find("dec1.safm.lambda")->trainable);
  CHECK(reg.find("dec1.safm.conv7.w") != nullptr);
  CHECK(reg.find("dec1.safm.conv1.b") != nullptr);

  const std::size_t c = 4;
  const std::size_t base = (2 * 49 + 1) + (c * 2 * c + 2 * c);
  CHECK(build(c).param_count() == base + 1);
  CHECK(p.param_count() == base);
  SafmConfig no_res;
  no_res.residual = false;
  CHECK(build(c, no_res).param_count() == base);
  CHECK(reg.trainable_count() == base);
}

TEST_CASE("safm: mismatched encoder and decoder shapes are rejected") {
  auto p = build(2);
  TapeD tape;
  CHECK_THROWS_AS(safm_forward(tape, cst(Tensor<double>({1, 2, 8, 8})),
                               cst(Tensor<double>({1, 2, 8, 7})), p),
                  ShapeError);
  CHECK_THROWS_AS(safm_forward(tape, cst(Tensor<double>({1, 3, 8, 8})),
                               cst(Tensor<double>({1, 3, 8, 8})), p),
                  ShapeError);
}
