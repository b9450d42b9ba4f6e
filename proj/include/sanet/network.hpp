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
#include <string>
#include <vector>

#include "sanet/dsm.hpp"
#include "sanet/layers.hpp"
#include "sanet/safm.hpp"

namespace sanet {

struct SANetConfig {
  std::size_t base_channels = 16;
  std::size_t stages = 5;
  DsmConfig dsm;
  SafmConfig safm;
  // false: plain concatenation skips (classic U-Net decoder).
  bool use_safm = true;

  // [C, 2C, 4C, ...], one entry per encoder stage.
  std::vector<std::size_t> channels() const;
  // Input extents must be divisible by this.
  std::size_t divisor() const { return std::size_t{1} << (stages - 1); }
  // Smallest spatial extent the deepest stage may see (7x7 attention kernels).
  static constexpr std::size_t kMinBottleneck = 7;

  // Throws std::invalid_argument describing the first violated constraint.
  void validate() const;
  void validate_input(std::size_t h, std::size_t w) const;
};

struct ModelCost {
  std::uint64_t params = 0;
  std::uint64_t flops = 0;  // 2 * multiply-accumulates of one forward pass
};

template <typename T>
class SANet {
 public:
  SANet(const SANetConfig& config, std::uint64_t seed);

  // x: [N, 1, H, W] -> per-pixel target probability [N, 1, H, W].
  Var<T> forward(Tape<T>& tape, const Var<T>& x, bool training) const;

  const SANetConfig& config() const { return config_; }
  const ParamRegistry<T>& params() const { return registry_; }

  // Trainable parameter count and forward FLOPs at the given input size.
  // FLOPs count convolutions, transposed convolutions and the channel
  // attention MLPs; norms, pooling and elementwise ops are not counted.
  ModelCost cost(std::size_t h, std::size_t w) const;

  const std::vector<Dsm<T>>& encoder() const { return enc_; }
  const std::vector<Conv<T>>& upsamplers() const { return up_; }
  const std::vector<Safm<T>>& fusions() const { return safm_; }
  const std::vector<ConvBnRelu<T>>& decoder_convs() const { return dec_; }
  const Conv<T>& head() const { return head_; }

 private:
  SANetConfig config_;
  std::vector<Dsm<T>> enc_;           // stages
  std::vector<Conv<T>> up_;           // stages - 1, transposed 2x2 weights [C(i+1), C(i), 2, 2]
  std::vector<Safm<T>> safm_;         // stages - 1 (empty when use_safm is off)
  std::vector<ConvBnRelu<T>> dec_;    // stages - 1, 3x3 2C -> C
  Conv<T> head_;                      // 3x3, C -> 1
  ParamRegistry<T> registry_;
};

}  // namespace sanet
