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

#include "sanet/layers.hpp"

namespace sanet {

// Pinwheel-shaped convolution: four strip-kernel branches, each padded on
// one side only so that it looks in a single direction, concatenated in the
// order (left, right, top, bottom) and mixed by a bias-free 1x1 convolution.
//
//   hl: 1 x k, pad left  = k - 1      hr: 1 x k, pad right  = k - 1
//   vt: k x 1, pad top   = k - 1      vb: k x 1, pad bottom = k - 1
//
// Every branch keeps the input's spatial extent and emits out/4 channels.
template <typename T>
struct PinwheelConv {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t k = 0;
  Conv<T> hl, hr, vt, vb;
  Conv<T> fuse;  // [out, out, 1, 1], no bias

  static PinwheelConv make(Initializer& init, std::size_t in, std::size_t out,
                           std::size_t k);

  void register_params(ParamRegistry<T>& reg, const std::string& prefix) const;
  std::size_t param_count() const;
  std::uint64_t macs(std::size_t h, std::size_t w) const;
};

template <typename T>
Var<T> pinwheel_forward(Tape<T>& tape, const Var<T>& x, const PinwheelConv<T>& p);

}  // namespace sanet
