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
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "sanet/autograd.hpp"

namespace sanet {

struct GradcheckOptions {
  double eps = 1e-5;
  double rtol = 1e-4;
  // 0 checks every coordinate; otherwise a seeded sample of this many
  // coordinates per input tensor.
  std::size_t max_coords_per_tensor = 0;
  std::uint64_t seed = 0;
  // Piecewise-linear graphs (relu, max) switch branch somewhere inside
  // [x - eps, x + eps] with high probability once they are large enough, and
  // the central difference then mixes two linear pieces. With this flag a
  // coordinate that misses rtol is re-estimated with one-sided differences
  // and with steps down to eps/1000; the closest estimate counts.
  bool refine_at_kinks = false;
};

struct GradcheckReport {
  bool passed = true;
  double worst_rel_error = 0.0;
  std::string worst_input;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coords_checked = 0;
  std::size_t coords_refined = 0;  // see refine_at_kinks
  std::string failure;  // non-empty when a non-finite value was hit
};

struct NamedVar {
  std::string name;
  Var<double> var;
};

// Builds a scalar graph from captured inputs. Called once with recording on
// and then repeatedly with recording off for the finite differences.
using ScalarGraph = std::function<Var<double>(Tape<double>&)>;

// Compares reverse-mode gradients against central differences
// (f(x + eps e_i) - f(x - eps e_i)) / (2 eps) coordinate by coordinate using
// relative error |a - n| / max(|a|, |n|, 1e-8).
GradcheckReport gradcheck(const ScalarGraph& f, const std::vector<NamedVar>& inputs,
                          const GradcheckOptions& opt = {});

// Single-input convenience form.
GradcheckReport gradcheck(
    const std::function<Var<double>(Tape<double>&, const Var<double>&)>& f,
    const Tensor<double>& x, const GradcheckOptions& opt = {});

}  // namespace sanet
