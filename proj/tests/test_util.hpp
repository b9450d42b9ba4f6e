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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "sanet/gradcheck.hpp"
#include "sanet/layers.hpp"

namespace sanet::testing {

using VarD = Var<double>;
using TapeD = Tape<double>;

inline VarD cst(Tensor<double> t) { return VarD::constant(std::move(t)); }

inline double max_abs_diff(const Tensor<double>& a, const Tensor<double>& b) {
  REQUIRE(a.shape() == b.shape());
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Random weighting makes sum-based objectives sensitive to every output cell.
inline VarD weighted_sum(TapeD& tape, const VarD& y, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  VarD r = cst(oracle::random_tensor(y.shape(), rng));
  return sum(tape, mul(tape, y, r));
}

inline std::vector<NamedVar> trainable_inputs(const ParamRegistry<double>& reg) {
  std::vector<NamedVar> out;
  for (const auto& e : reg.trainable()) out.push_back({e.name, e.var});
  return out;
}

inline void fill(const VarD& v, double value) { v.mutable_value().fill(value); }

inline void randomize(const VarD& v, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  v.mutable_value() = oracle::random_tensor(v.shape(), rng, lo, hi);
}

inline bool ends_with(const std::string& s, const std::string& tail) {
  return s.size() >= tail.size() && s.compare(s.size() - tail.size(), tail.size(), tail) == 0;
}

// In training mode every conv bias outside the attention path feeds a batch
// norm that subtracts it again, so its gradient is exactly zero and has no
// meaningful relative error. Those are checked for zero instead.
inline bool feeds_bn(const std::string& name) {
  return ends_with(name, ".b") && name.find("cbam") == std::string::npos;
}

inline double max_abs(const Tensor<double>& t) {
  double m = 0;
  for (double v : t.values()) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace sanet::testing
