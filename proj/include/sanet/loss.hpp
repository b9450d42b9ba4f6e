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

#include "sanet/autograd.hpp"

namespace sanet {

// Soft-IoU over the whole batch:
//   L = 1 - (sum(p*y) + eps) / (sum(p) + sum(y) - sum(p*y) + eps)
// `target` must be binary and shaped like `pred`.
template <typename T>
Var<T> soft_iou_loss(Tape<T>& tape, const Var<T>& pred, const Tensor<T>& target,
                     T eps = T{1});

}  // namespace sanet
