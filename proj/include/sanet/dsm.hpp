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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sanet/layers.hpp"
#include "sanet/pinwheel.hpp"

namespace sanet {

enum class CbamOrder { ChannelFirst, SpatialFirst };

struct DsmConfig {
  // Second branch: pinwheel cascade (k = 3, 5, 3) when true. When false the
  // block is single-branch unless plain_branch_b asks for a 3x3 conv stack
  // of the same depth in its place.
  bool use_pinwheel = true;
  bool plain_branch_b = false;
  bool use_cbam = true;
  CbamOrder cbam_order = CbamOrder::ChannelFirst;
  std::size_t reduction = 8;
  std::size_t min_hidden = 4;

  bool has_branch_b() const { return use_pinwheel || plain_branch_b; }
};

// Shared two-layer MLP over global avg- and max-pooled channel descriptors.
template <typename T>
struct ChannelAttention {
  Conv<T> fc1;  // [hidden, C, 1, 1]
  Conv<T> fc2;  // [C, hidden, 1, 1]

  static ChannelAttention make(Initializer& init, std::size_t channels,
                               const DsmConfig& cfg);
  void register_params(ParamRegistry<T>& reg, const std::string& prefix) const;
  std::size_t param_count() const { return fc1.param_count() + fc2.param_count(); }
  std::uint64_t macs() const { return 2 * (fc1.weight.size() + fc2.weight.size()); }
};

// 7x7 convolution over the stacked channel-average and channel-max maps.
template <typename T>
struct SpatialAttention {
  Conv<T> conv7;  // [1, 2, 7, 7] + bias

  static SpatialAttention make(Initializer& init);
  void register_params(ParamRegistry<T>& reg, const std::string& prefix) const;
  std::size_t param_count() const { return conv7.param_count(); }
  std::uint64_t macs(std::size_t h, std::size_t w) const { return conv7.macs(h, w); }
};

// gate = sigmoid(MLP(avg_pool(f)) + MLP(max_pool(f))), shape [N, C, 1, 1]
template <typename T>
Var<T> channel_attention(Tape<T>& tape, const Var<T>& f, const ChannelAttention<T>& p);

// gate = sigmoid(conv7([mean_c(f), max_c(f)])), shape [N, 1, H, W]
template <typename T>
Var<T> spatial_attention(Tape<T>& tape, const Var<T>& f, const SpatialAttention<T>& p);

// One stage of the second branch: a pinwheel conv or a 3x3 conv, then
// batch norm and relu.
template <typename T>
struct BranchStage {
  std::optional<PinwheelConv<T>> pconv;
  std::optional<Conv<T>> conv;
  BatchNorm<T> bn;
};

template <typename T>
struct Dsm {
  DsmConfig cfg;
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  ConvBnRelu<T> a0, a1;
  std::vector<BranchStage<T>> b;
  std::optional<ConvBnRelu<T>> fuse;  // 3x3, 2C -> C
  std::optional<ChannelAttention<T>> ch;
  std::optional<SpatialAttention<T>> sp;

  static Dsm make(Initializer& init, std::size_t in, std::size_t out, const DsmConfig& cfg);

  void register_params(ParamRegistry<T>& reg, const std::string& prefix) const;
  std::size_t param_count() const;
  std::uint64_t macs(std::size_t h, std::size_t w) const;
};

// Fused dual-branch feature before attention recalibration.
template <typename T>
Var<T> dsm_features(Tape<T>& tape, const Var<T>& x, const Dsm<T>& p, bool training);

template <typename T>
Var<T> dsm_forward(Tape<T>& tape, const Var<T>& x, const Dsm<T>& p, bool training);

}  // namespace sanet
