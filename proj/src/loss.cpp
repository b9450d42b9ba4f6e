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

#include "sanet/loss.hpp"

#include <stdexcept>

namespace sanet {

template <typename T>
Var<T> soft_iou_loss(Tape<T>& tape, const Var<T>& pred, const Tensor<T>& target, T eps) {
  if (pred.shape() != target.shape()) {
    throw ShapeError("soft_iou_loss: prediction " + shape_str(pred.shape()) +
                     " and target " + shape_str(target.shape()) + " differ");
  }
  const Tensor<T>& p = pred.value();
  T inter{0}, sp{0}, sy{0};
  for (std::size_t i = 0; i < p.size(); ++i) {
    const T y = target[i];
    if (y != T{0} && y != T{1}) {
      throw std::invalid_argument("soft_iou_loss: target value " + std::to_string(y) +
                                  " at index " + std::to_string(i) + " is not 0 or 1");
    }
    inter += p[i] * y;
    sp += p[i];
    sy += y;
  }
  const T num = inter + eps;
  const T den = sp + sy - inter + eps;
  Var<T> loss = tape.make_output(Tensor<T>::scalar(T{1} - num / den), pred.requires_grad());
  if (loss.requires_grad()) {
    tape.record([pred, target, loss, num, den]() mutable {
      if (!loss.has_grad()) return;
      // dL/dp_i = -(y_i * den - num * (1 - y_i)) / den^2
      const T g = loss.grad()[0];
      const T inv = T{1} / (den * den);
      Tensor<T>& gp = pred.grad_buffer();
      for (std::size_t i = 0; i < gp.size(); ++i) {
        const T y = target[i];
        gp[i] += -g * (y * den - num * (T{1} - y)) * inv;
      }
    });
  }
  return loss;
}

template Var<float> soft_iou_loss(Tape<float>&, const Var<float>&, const Tensor<float>&, float);
template Var<double> soft_iou_loss(Tape<double>&, const Var<double>&, const Tensor<double>&,
                                   double);

}  // namespace sanet
