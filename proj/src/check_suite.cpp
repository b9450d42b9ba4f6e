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

#include "sanet/check_suite.hpp"

#include <chrono>
#include <cmath>
#include <random>

#include "sanet/dsm.hpp"
#include "sanet/loss.hpp"
#include "sanet/network.hpp"
#include "sanet/ops.hpp"
#include "sanet/pinwheel.hpp"
#include "sanet/safm.hpp"

namespace sanet {

namespace {

using VarD = Var<double>;
using TapeD = Tape<double>;

Tensor<double> uniform(const Shape& shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Tensor<double> t(shape);
  for (auto& v : t.values()) v = dist(rng);
  return t;
}

VarD leaf(const Shape& shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  return VarD::leaf(uniform(shape, rng, lo, hi), true);
}

// Projects onto fixed random weights so every output cell matters.
VarD project(TapeD& tape, const VarD& y, std::mt19937_64::result_type seed) {
  std::mt19937_64 rng(seed);
  return sum(tape, mul(tape, y, VarD::constant(uniform(y.shape(), rng))));
}

bool ends_with(const std::string& s, const std::string& tail) {
  return s.size() >= tail.size() && s.compare(s.size() - tail.size(), tail.size(), tail) == 0;
}

std::vector<NamedVar> trainable(const ParamRegistry<double>& reg) {
  std::vector<NamedVar> out;
  for (const auto& e : reg.trainable()) out.push_back({e.name, e.var});
  return out;
}

// Zero biases put relu inputs exactly on the kink.
void jitter_offsets(const ParamRegistry<double>& reg, std::mt19937_64& rng, double r) {
  for (const auto& e : reg.trainable()) {
    if (ends_with(e.name, ".b") || ends_with(e.name, ".beta")) {
      e.var.mutable_value() = uniform(e.var.shape(), rng, -r, r);
    }
  }
}

// Conv biases in front of a training-mode batch norm are cancelled by the
// mean subtraction. They are excluded from the comparison and required to
// receive a zero gradient instead.
bool cancelled_by_bn(const std::string& name, bool training) {
  return training && ends_with(name, ".b") && name.find("cbam") == std::string::npos &&
         name.find("dsm") != std::string::npos;
}

class Suite {
 public:
  explicit Suite(std::uint64_t seed) : rng_(seed) {}

  void add(const std::string& name, const ScalarGraph& f, const std::vector<NamedVar>& in,
           const GradcheckOptions& opt = {}) {
    const auto t0 = std::chrono::steady_clock::now();
    SuiteEntry e{name, gradcheck(f, in, opt), 0.0};
    e.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out_.push_back(std::move(e));
  }

  // Marks the last entry failed when any listed parameter got a gradient.
  void require_zero_grad(const std::vector<NamedVar>& vars, const ScalarGraph& f) {
    for (const auto& v : vars) v.var.zero_grad();
    TapeD tape;
    VarD loss = f(tape);
    tape.backward(loss);
    for (const auto& v : vars) {
      for (double g : v.var.grad().values()) {
        if (std::abs(g) > 1e-10) {
          out_.back().report.passed = false;
          out_.back().report.failure = v.name + " should receive no gradient";
          return;
        }
      }
    }
  }

  std::mt19937_64& rng() { return rng_; }
  std::vector<SuiteEntry> take() { return std::move(out_); }

 private:
  std::mt19937_64 rng_;
  std::vector<SuiteEntry> out_;
};

void primitives(Suite& s) {
  auto& rng = s.rng();
  auto x = leaf({2, 3, 6, 6}, rng);
  auto b4 = leaf({4}, rng);
  const Padding pads[] = {{0, 0, 2, 0}, {0, 0, 0, 2}, {2, 0, 0, 0}, {0, 2, 0, 0}};
  const char* names[] = {"conv2d 1x3 pad left", "conv2d 1x3 pad right", "conv2d 3x1 pad top",
                         "conv2d 3x1 pad bottom"};
  for (int i = 0; i < 4; ++i) {
    auto w = leaf(i < 2 ? Shape{4, 3, 1, 3} : Shape{4, 3, 3, 1}, rng);
    const Padding p = pads[i];
    s.add(names[i], [=](TapeD& t) { return project(t, conv2d(t, x, w, b4, {1, p}), 10 + i); },
          {{"x", x}, {"w", w}, {"b", b4}});
  }
  auto w3 = leaf({4, 3, 3, 3}, rng);
  s.add("conv2d 3x3 same", [=](TapeD& t) {
    return project(t, conv2d(t, x, w3, b4, {1, Padding::same(1)}), 14);
  }, {{"x", x}, {"w", w3}, {"b", b4}});
  s.add("conv2d 3x3 stride 2", [=](TapeD& t) {
    return project(t, conv2d(t, x, w3, VarD{}, {2, Padding{1, 0, 0, 1}}), 15);
  }, {{"x", x}, {"w", w3}});
  s.add("max_pool2d", [=](TapeD& t) { return project(t, max_pool2d(t, x), 16); }, {{"x", x}});
  auto wt = leaf({3, 2, 2, 2}, rng);
  auto bt = leaf({2}, rng);
  s.add("transposed_conv2d", [=](TapeD& t) {
    return project(t, transposed_conv2d(t, x, wt, bt), 17);
  }, {{"x", x}, {"w", wt}, {"b", bt}});
  s.add("channel mean", [=](TapeD& t) { return project(t, reduce_channels(t, x, Reduce::Avg), 18); },
        {{"x", x}});
  s.add("channel max", [=](TapeD& t) { return project(t, reduce_channels(t, x, Reduce::Max), 19); },
        {{"x", x}});
  s.add("global avg pool", [=](TapeD& t) { return project(t, reduce_spatial(t, x, Reduce::Avg), 20); },
        {{"x", x}});
  s.add("global max pool", [=](TapeD& t) { return project(t, reduce_spatial(t, x, Reduce::Max), 21); },
        {{"x", x}});
  s.add("sigmoid", [=](TapeD& t) { return project(t, sigmoid(t, x), 22); }, {{"x", x}});
  s.add("relu", [=](TapeD& t) { return project(t, relu(t, x), 23); }, {{"x", x}});
  auto gamma = leaf({3}, rng, 0.5, 1.5);
  auto beta = leaf({3}, rng);
  for (bool training : {true, false}) {
    s.add(training ? "batch_norm train" : "batch_norm eval", [=](TapeD& t) {
      Tensor<double> rm({3}), rv({3}, 1.0);
      return project(t, batch_norm(t, x, gamma, beta, rm, rv, {training}), 24);
    }, {{"x", x}, {"gamma", gamma}, {"beta", beta}});
  }
}

void modules(Suite& s) {
  auto& rng = s.rng();
  for (std::size_t k : {3u, 5u}) {
    Initializer init(rng());
    auto p = PinwheelConv<double>::make(init, 3, 8, k);
    ParamRegistry<double> reg;
    p.register_params(reg, "pconv");
    jitter_offsets(reg, rng, 1.0);
    auto x = leaf({2, 3, 6, 5}, rng);
    auto in = trainable(reg);
    in.push_back({"x", x});
    s.add("pinwheel k=" + std::to_string(k),
          [=](TapeD& t) { return project(t, pinwheel_forward(t, x, p), 30 + k); }, in);
  }

  DsmConfig dcfg;
  {
    Initializer init(rng());
    auto ch = ChannelAttention<double>::make(init, 8, dcfg);
    ParamRegistry<double> reg;
    ch.register_params(reg, "cbam.ch");
    jitter_offsets(reg, rng, 0.5);
    auto f = leaf({2, 8, 5, 5}, rng);
    auto in = trainable(reg);
    in.push_back({"f", f});
    s.add("channel attention", [=](TapeD& t) { return project(t, channel_attention(t, f, ch), 40); },
          in);
  }
  {
    Initializer init(rng());
    auto sp = SpatialAttention<double>::make(init);
    ParamRegistry<double> reg;
    sp.register_params(reg, "cbam.sp");
    jitter_offsets(reg, rng, 0.5);
    auto f = leaf({2, 4, 6, 6}, rng);
    auto in = trainable(reg);
    in.push_back({"f", f});
    s.add("spatial attention", [=](TapeD& t) { return project(t, spatial_attention(t, f, sp), 41); },
          in);
  }
  for (CbamOrder order : {CbamOrder::ChannelFirst, CbamOrder::SpatialFirst}) {
    DsmConfig cfg;
    cfg.cbam_order = order;
    Initializer init(rng());
    auto d = Dsm<double>::make(init, 4, 8, cfg);
    ParamRegistry<double> reg;
    d.register_params(reg, "dsm");
    jitter_offsets(reg, rng, 0.5);
    auto x = leaf({1, 4, 8, 8}, rng);
    for (bool training : {true, false}) {
      std::vector<NamedVar> in{{"x", x}}, zero;
      for (const auto& e : reg.trainable()) {
        (cancelled_by_bn(e.name, training) ? zero : in).push_back({e.name, e.var});
      }
      ScalarGraph f = [=](TapeD& t) { return project(t, dsm_forward(t, x, d, training), 42); };
      GradcheckOptions opt;
      opt.refine_at_kinks = true;
      s.add(std::string("dsm ") + (order == CbamOrder::ChannelFirst ? "channel-first " : "spatial-first ") +
                (training ? "train" : "eval"),
            f, in, opt);
      s.require_zero_grad(zero, f);
    }
  }

  for (bool residual : {true, false}) {
    SafmConfig cfg;
    cfg.residual = residual;
    Initializer init(rng());
    auto p = Safm<double>::make(init, 2, cfg);
    p.lambda.mutable_value().fill(0.3);
    ParamRegistry<double> reg;
    p.register_params(reg, "safm");
    jitter_offsets(reg, rng, 1.0);
    auto e = leaf({2, 2, 7, 7}, rng);
    auto d = leaf({2, 2, 7, 7}, rng);
    auto in = trainable(reg);
    in.push_back({"E", e});
    in.push_back({"D", d});
    s.add(residual ? "safm (with lambda)" : "safm without residual",
          [=](TapeD& t) { return project(t, safm_forward(t, e, d, p), 50); }, in);
  }

  {
    auto p = leaf({2, 1, 5, 6}, rng, 0.05, 0.95);
    Tensor<double> y({2, 1, 5, 6});
    std::bernoulli_distribution on(0.3);
    for (auto& v : y.values()) v = on(rng);
    for (double eps : {1.0, 1e-3}) {
      s.add(eps == 1.0 ? "soft-IoU loss" : "soft-IoU loss eps=1e-3",
            [=](TapeD& t) { return soft_iou_loss(t, p, y, eps); }, {{"pred", p}});
    }
  }
}

void network(Suite& s) {
  auto& rng = s.rng();
  SANetConfig cfg;
  cfg.base_channels = 8;
  cfg.stages = 3;
  for (bool training : {false, true}) {
    SANet<double> net(cfg, rng());
    for (const auto& f : net.fusions()) f.lambda.mutable_value().fill(0.5);
    jitter_offsets(net.params(), rng, 0.2);
    auto x = leaf({1, 1, 28, 28}, rng, 0.0, 1.0);
    std::vector<NamedVar> in{{"x", x}}, zero;
    for (const auto& e : net.params().trainable()) {
      (cancelled_by_bn(e.name, training) ? zero : in).push_back({e.name, e.var});
    }
    GradcheckOptions opt;
    opt.max_coords_per_tensor = 4;
    opt.seed = rng();
    opt.refine_at_kinks = true;
    ScalarGraph f = [&net, x, training](TapeD& t) { return project(t, net.forward(t, x, training), 60); };
    s.add(std::string("network end-to-end ") + (training ? "train" : "eval"), f, in, opt);
    s.require_zero_grad(zero, f);
  }
}

}  // namespace

std::vector<SuiteEntry> run_gradcheck_suite(std::uint64_t seed) {
  Suite s(seed);
  primitives(s);
  modules(s);
  network(s);
  return s.take();
}

}  // namespace sanet
