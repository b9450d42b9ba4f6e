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

struct SafmConfig {
  bool residual = true;          // false: output = conv1(Y) * X
  bool lambda_learnable = true;  // false: lambda frozen at 1
};

// Saliency-weighted fusion of an encoder feature E and a same-shaped
// decoder feature D:
//
//   X   = concat(E, D)
//   SAF = conv7(concat(mean_c(X), max_c(X)))          one channel
//   Y   = E * sigmoid(SAF) + D * sigmoid(1 - SAF)       SAF broadcast over C
//   out = lambda * (conv1(Y) * X) + X                   conv1: C -> 2C
template <typename T>
struct Safm {
  SafmConfig cfg;
  std::size_t channels = 0;  // C, the width of E and D
  Conv<T> conv7;             // [1, 2, 7, 7] + bias
  Conv<T> conv1;             // [2C, C, 1, 1] + bias
  Var<T> lambda;             // single element

  static Safm make(Initializer& init, std::size_t channels, const SafmConfig& cfg);

  void register_params(ParamRegistry<T>& reg, const std::string& prefix) const;
  std::size_t param_count() const;
  std::uint64_t macs(std::size_t h, std::size_t w) const;
};

// Intermediate tensors of one fusion, for tests and diagnostics.
template <typename T>
struct SafmTrace {
  Var<T> x, saf, e_weight, d_weight, y, out;
};

template <typename T>
SafmTrace<T> safm_trace(Tape<T>& tape, const Var<T>& enc, const Var<T>& dec,
                        const Safm<T>& p);

template <typename T>
Var<T> safm_forward(Tape<T>& tape, const Var<T>& enc, const Var<T>& dec, const Safm<T>& p);

}  // namespace sanet
