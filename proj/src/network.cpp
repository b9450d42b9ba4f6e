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

#include "sanet/network.hpp"

#include <stdexcept>

namespace sanet {

std::vector<std::size_t> SANetConfig::channels() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < stages; ++i) out.push_back(base_channels << i);
  return out;
}

void SANetConfig::validate() const {
  if (stages < 2 || stages > 8) {
    throw std::invalid_argument("stages must be in [2, 8], got " + std::to_string(stages));
  }
  if (base_channels == 0 || base_channels % 4 != 0) {
    throw std::invalid_argument("base_channels must be a positive multiple of 4, got " +
                                std::to_string(base_channels));
  }
  if (dsm.reduction == 0) throw std::invalid_argument("attention reduction must be positive");
}

void SANetConfig::validate_input(std::size_t h, std::size_t w) const {
  const std::size_t d = divisor();
  if (h % d != 0 || w % d != 0) {
    throw std::invalid_argument("input " + std::to_string(h) + "x" + std::to_string(w) +
                                " must be divisible by " + std::to_string(d) + " for " +
                                std::to_string(stages) + " stages");
  }
  if (h / d < kMinBottleneck || w / d < kMinBottleneck) {
    throw std::invalid_argument("input " + std::to_string(h) + "x" + std::to_string(w) +
                                " leaves a " + std::to_string(h / d) + "x" +
                                std::to_string(w / d) + " bottleneck; need at least " +
                                std::to_string(kMinBottleneck) + "x" +
                                std::to_string(kMinBottleneck));
  }
}

template <typename T>
SANet<T>::SANet(const SANetConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  Initializer init(seed);
  const auto ch = config_.channels();
  std::size_t cin = 1;
  for (std::size_t i = 0; i < config_.stages; ++i) {
    enc_.push_back(Dsm<T>::make(init, cin, ch[i], config_.dsm));
    cin = ch[i];
  }
  for (std::size_t i = 0; i + 1 < config_.stages; ++i) {
    Conv<T> up;
    // Each output cell of a 2x2/stride-2 transposed conv sees C(i+1) inputs.
    up.weight = Var<T>::leaf(init.kaiming_uniform<T>({ch[i + 1], ch[i], 2, 2}, ch[i + 1]), true);
    up.bias = Var<T>::leaf(Tensor<T>({ch[i]}), true);
    up_.push_back(up);
    if (config_.use_safm) safm_.push_back(Safm<T>::make(init, ch[i], config_.safm));
    dec_.push_back(ConvBnRelu<T>::make(init, 2 * ch[i], ch[i], 3));
  }
  head_ = Conv<T>::make(init, ch[0], 1, 3, 3, Padding::same(1), true);

  for (std::size_t i = 0; i < enc_.size(); ++i) {
    enc_[i].register_params(registry_, "enc" + std::to_string(i + 1) + ".dsm");
  }
  for (std::size_t i = 0; i < up_.size(); ++i) {
    const std::string lvl = std::to_string(i + 1);
    registry_.add("up" + lvl + ".w", up_[i].weight, true);
    registry_.add("up" + lvl + ".b", up_[i].bias, true);
    if (config_.use_safm) safm_[i].register_params(registry_, "dec" + lvl + ".safm");
    dec_[i].register_params(registry_, "dec" + lvl + ".fuse");
  }
  head_.register_params(registry_, "head");
}

template <typename T>
Var<T> SANet<T>::forward(Tape<T>& tape, const Var<T>& x, bool training) const {
  if (x.value().rank() != 4 || x.dim(1) != 1) {
    throw ShapeError("SANet expects a single-channel [N,1,H,W] input, got " +
                     shape_str(x.shape()));
  }
  config_.validate_input(x.dim(2), x.dim(3));

  std::vector<Var<T>> skips;
  Var<T> h = x;
  for (std::size_t i = 0; i < enc_.size(); ++i) {
    if (i > 0) h = max_pool2d(tape, h);
    h = dsm_forward(tape, h, enc_[i], training);
    skips.push_back(h);
  }
  for (std::size_t i = up_.size(); i-- > 0;) {
    Var<T> d = transposed_conv2d(tape, h, up_[i].weight, up_[i].bias);
    Var<T> fused = config_.use_safm ? safm_forward(tape, skips[i], d, safm_[i])
                                    : concat_channels(tape, skips[i], d);
    h = dec_[i](tape, fused, training);
  }
  return sigmoid(tape, head_(tape, h));
}

template <typename T>
ModelCost SANet<T>::cost(std::size_t h, std::size_t w) const {
  ModelCost c;
  c.params = registry_.trainable_count();
  std::uint64_t macs = 0;
  for (std::size_t i = 0; i < enc_.size(); ++i) macs += enc_[i].macs(h >> i, w >> i);
  for (std::size_t i = 0; i < up_.size(); ++i) {
    const std::size_t hi = h >> i, wi = w >> i;
    // transposed conv: every input cell of level i+1 drives Cout*4 outputs
    macs += static_cast<std::uint64_t>(up_[i].weight.size()) * (hi / 2) * (wi / 2);
    if (config_.use_safm) macs += safm_[i].macs(hi, wi);
    macs += dec_[i].macs(hi, wi);
  }
  macs += head_.macs(h, w);
  c.flops = 2 * macs;
  return c;
}

template class SANet<float>;
template class SANet<double>;

}  // namespace sanet
