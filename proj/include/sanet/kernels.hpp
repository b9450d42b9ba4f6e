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

// Raw forward/adjoint kernels over plain tensors. The differentiable ops in
// ops.hpp wrap these; nothing here touches the tape.

#include <cstddef>
#include <vector>

#include "sanet/tensor.hpp"

namespace sanet {

// Zero padding added on each side of the spatial plane.
struct Padding {
  std::size_t top = 0;
  std::size_t bottom = 0;
  std::size_t left = 0;
  std::size_t right = 0;

  static Padding same(std::size_t p) { return {p, p, p, p}; }
  friend bool operator==(const Padding&, const Padding&) = default;
};

struct Conv2dGeometry {
  std::size_t n, cin, h, w;
  std::size_t cout, kh, kw;
  std::size_t stride;
  Padding pad;
  std::size_t out_h, out_w;
};

// Validates operand shapes and computes the output extent
// floor((H + top + bottom - kh) / stride) + 1 (and likewise for W).
template <typename T>
Conv2dGeometry conv2d_geometry(const Tensor<T>& x, const Tensor<T>& w,
                               std::size_t stride, const Padding& pad);

namespace kernels {

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Tensor<T>& w,
                         const Tensor<T>* bias, std::size_t stride,
                         const Padding& pad);

// Accumulates into whichever of dx/dw/db is non-null.
template <typename T>
void conv2d_backward(const Tensor<T>& x, const Tensor<T>& w,
                     const Tensor<T>& dy, std::size_t stride, const Padding& pad,
                     Tensor<T>* dx, Tensor<T>* dw, Tensor<T>* db);

// 2x2 / stride-2 max pooling; `argmax` receives the flat input index chosen
// for every output cell (first maximum in row-major window order).
template <typename T>
Tensor<T> max_pool2d_forward(const Tensor<T>& x, std::vector<std::size_t>& argmax);

// Stride-2, 2x2 transposed convolution. Weight layout [Cin, Cout, 2, 2].
template <typename T>
Tensor<T> transposed_conv2d_forward(const Tensor<T>& x, const Tensor<T>& w,
                                    const Tensor<T>* bias);

template <typename T>
void transposed_conv2d_backward(const Tensor<T>& x, const Tensor<T>& w,
                                const Tensor<T>& dy, Tensor<T>* dx,
                                Tensor<T>* dw, Tensor<T>* db);

}  // namespace kernels
}  // namespace sanet
