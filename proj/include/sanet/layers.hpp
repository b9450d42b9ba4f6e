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

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "sanet/ops.hpp"

namespace sanet {

// Named view over every tensor a model owns, in construction order.
// Non-trainable entries (running statistics, a frozen lambda) are still
// listed so checkpoints capture the full state.
template <typename T>
class ParamRegistry {
 public:
  struct Entry {
    std::string name;
    Var<T> var;
    bool trainable;
  };

  void add(std::string name, Var<T> var, bool trainable) {
    for (const auto& e : entries_) {
      if (e.name == name) throw std::logic_error("duplicate parameter name " + name);
    }
    entries_.push_back({std::move(name), std::move(var), trainable});
  }

  const std::vector<Entry>& entries() const { return entries_; }

  std::vector<Entry> trainable() const {
    std::vector<Entry> out;
    for (const auto& e : entries_) {
      if (e.trainable) out.push_back(e);
    }
    return out;
  }

  const Entry* find(const std::string& name) const {
    for (const auto& e : entries_) {
      if (e.name == name) return &e;
    }
    return nullptr;
  }

  std::size_t trainable_count() const {
    std::size_t n = 0;
    for (const auto& e : entries_) {
      if (e.trainable) n += e.var.size();
    }
    return n;
  }

  void zero_grad() const {
    for (const auto& e : entries_) e.var.zero_grad();
  }

 private:
  std::vector<Entry> entries_;
};

// Seeded weight initialisation. Conv weights are Kaiming-uniform with the
// ReLU gain: U(-b, b), b = sqrt(6 / fan_in).
class Initializer {
 public:
  explicit Initializer(std::uint64_t seed) : rng_(seed) {}

  template <typename T>
  Tensor<T> kaiming_uniform(Shape shape, std::size_t fan_in) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Tensor<T> t(std::move(shape));
    for (auto& v : t.values()) v = static_cast<T>(dist(rng_));
    return t;
  }

 private:
  std::mt19937_64 rng_;
};

template <typename T>
struct Conv {
  Var<T> weight;  // [Cout, Cin, kh, kw]
  Var<T> bias;    // [Cout] or empty
  Conv2dOptions opt;

  static Conv make(Initializer& init, std::size_t cin, std::size_t cout,
                   std::size_t kh, std::size_t kw, Padding pad, bool with_bias) {
    Conv c;
    c.weight = Var<T>::leaf(init.kaiming_uniform<T>({cout, cin, kh, kw}, cin * kh * kw), true);
    if (with_bias) c.bias = Var<T>::leaf(Tensor<T>({cout}), true);
    c.opt = {1, pad};
    return c;
  }

  std::size_t in_channels() const { return weight.dim(1); }
  std::size_t out_channels() const { return weight.dim(0); }

  Var<T> operator()(Tape<T>& tape, const Var<T>& x) const {
    return conv2d(tape, x, weight, bias, opt);
  }

  void register_params(ParamRegistry<T>& reg, const std::string& prefix) const {
    reg.add(prefix + ".w", weight, true);
    if (bias) reg.add(prefix + ".b", bias, true);
  }

  std::size_t param_count() const { return weight.size() + (bias ? bias.size() : 0); }

  // Multiply-accumulates for one image at the given input extent.
  std::uint64_t macs(std::size_t h, std::size_t w) const {
    const std::size_t oh = (h + opt.pad.top + opt.pad.bottom - weight.dim(2)) / opt.stride + 1;
    const std::size_t ow = (w + opt.pad.left + opt.pad.right - weight.dim(3)) / opt.stride + 1;
    return static_cast<std::uint64_t>(weight.size()) * oh * ow;
  }
};

template <typename T>
struct BatchNorm {
  Var<T> gamma, beta;               // trainable, [C]
  Var<T> running_mean, running_var;  // buffers, [C]

  static BatchNorm make(std::size_t channels) {
    BatchNorm b;
    b.gamma = Var<T>::leaf(Tensor<T>({channels}, T{1}), true);
    b.beta = Var<T>::leaf(Tensor<T>({channels}, T{0}), true);
    b.running_mean = Var<T>::constant(Tensor<T>({channels}, T{0}));
    b.running_var = Var<T>::constant(Tensor<T>({channels}, T{1}));
    return b;
  }

  Var<T> operator()(Tape<T>& tape, const Var<T>& x, bool training) const {
    BatchNormOptions o;
    o.training = training;
    return batch_norm(tape, x, gamma, beta, running_mean.mutable_value(),
                      running_var.mutable_value(), o);
  }

  void register_params(ParamRegistry<T>& reg, const std::string& prefix) const {
    reg.add(prefix + ".gamma", gamma, true);
    reg.add(prefix + ".beta", beta, true);
    reg.add(prefix + ".mean", running_mean, false);
    reg.add(prefix + ".var", running_var, false);
  }

  std::size_t param_count() const { return gamma.size() + beta.size(); }
};

// conv -> batch norm -> relu
template <typename T>
struct ConvBnRelu {
  Conv<T> conv;
  BatchNorm<T> bn;

  static ConvBnRelu make(Initializer& init, std::size_t cin, std::size_t cout,
                         std::size_t k) {
    return {Conv<T>::make(init, cin, cout, k, k, Padding::same(k / 2), true),
            BatchNorm<T>::make(cout)};
  }

  Var<T> operator()(Tape<T>& tape, const Var<T>& x, bool training) const {
    return relu(tape, bn(tape, conv(tape, x), training));
  }

  void register_params(ParamRegistry<T>& reg, const std::string& prefix) const {
    conv.register_params(reg, prefix);
    bn.register_params(reg, prefix + ".bn");
  }

  std::size_t param_count() const { return conv.param_count() + bn.param_count(); }
  std::uint64_t macs(std::size_t h, std::size_t w) const { return conv.macs(h, w); }
};

}  // namespace sanet
