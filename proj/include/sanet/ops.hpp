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

// Differentiable operations. Every op computes its forward value eagerly and,
// when recording is on and an input requires grad, appends its adjoint to the
// tape.

#include <cstddef>

#include "sanet/autograd.hpp"
#include "sanet/kernels.hpp"
#include "sanet/tensor.hpp"

namespace sanet {

enum class Reduce { Avg, Max };

struct Conv2dOptions {
  std::size_t stride = 1;
  Padding pad{};
};

// `bias` may be an empty Var.
template <typename T>
Var<T> conv2d(Tape<T>& tape, const Var<T>& x, const Var<T>& weight,
              const Var<T>& bias, const Conv2dOptions& opt = {});

template <typename T>
Var<T> max_pool2d(Tape<T>& tape, const Var<T>& x);

template <typename T>
Var<T> transposed_conv2d(Tape<T>& tape, const Var<T>& x, const Var<T>& weight,
                         const Var<T>& bias);

// [N,C,H,W] -> [N,1,H,W]
template <typename T>
Var<T> reduce_channels(Tape<T>& tape, const Var<T>& x, Reduce mode);

// [N,C,H,W] -> [N,C,1,1]
template <typename T>
Var<T> reduce_spatial(Tape<T>& tape, const Var<T>& x, Reduce mode);

// Identical shapes, or one rank-4 operand with a single channel that is
// broadcast across the other's channels.
template <typename T>
Var<T> add(Tape<T>& tape, const Var<T>& a, const Var<T>& b);
template <typename T>
Var<T> mul(Tape<T>& tape, const Var<T>& a, const Var<T>& b);

// x[N,C,H,W] * gate[N,C,1,1]
template <typename T>
Var<T> scale_channels(Tape<T>& tape, const Var<T>& x, const Var<T>& gate);

template <typename T>
Var<T> sigmoid(Tape<T>& tape, const Var<T>& x);
template <typename T>
Var<T> relu(Tape<T>& tape, const Var<T>& x);

template <typename T>
Var<T> concat_channels(Tape<T>& tape, const Var<T>& a, const Var<T>& b);
template <typename T>
Var<T> slice_channels(Tape<T>& tape, const Var<T>& x, std::size_t begin,
                      std::size_t count);

// s * x
template <typename T>
Var<T> scale(Tape<T>& tape, const Var<T>& x, T s);
// a * x + b
template <typename T>
Var<T> affine(Tape<T>& tape, const Var<T>& x, T a, T b);
// s * x where s is a single-element variable (e.g. a learnable scalar)
template <typename T>
Var<T> scale_by(Tape<T>& tape, const Var<T>& x, const Var<T>& s);

template <typename T>
Var<T> sum(Tape<T>& tape, const Var<T>& x);

struct BatchNormOptions {
  bool training = true;
  double momentum = 0.1;
  double eps = 1e-5;
};

// Training mode normalises with batch statistics (biased variance) and
// folds them into the running estimates (unbiased variance); inference mode
// normalises with the running estimates.
template <typename T>
Var<T> batch_norm(Tape<T>& tape, const Var<T>& x, const Var<T>& gamma,
                  const Var<T>& beta, Tensor<T>& running_mean,
                  Tensor<T>& running_var, const BatchNormOptions& opt);

}  // namespace sanet
