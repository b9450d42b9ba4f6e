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

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "sanet/tensor.hpp"

namespace sanet {

template <typename T>
struct Node {
  Tensor<T> value;
  Tensor<T> grad;  // empty until first accumulation
  bool requires_grad = false;
  bool is_leaf = true;

  Tensor<T>& grad_buffer() {
    if (grad.size() != value.size()) grad = Tensor<T>(value.shape());
    return grad;
  }
};

// Shared handle to a tensor that may take part in gradient propagation.
// Copies share the node, so a const handle still allows mutating the value
// and gradient.
template <typename T>
class Var {
 public:
  Var() = default;

  static Var leaf(Tensor<T> value, bool requires_grad = false) {
    Var v;
    v.node_ = std::make_shared<Node<T>>();
    v.node_->value = std::move(value);
    v.node_->requires_grad = requires_grad;
    return v;
  }
  static Var constant(Tensor<T> value) { return leaf(std::move(value), false); }

  explicit operator bool() const { return node_ != nullptr; }

  const Tensor<T>& value() const { return node_->value; }
  Tensor<T>& mutable_value() const { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  std::size_t dim(std::size_t i) const { return node_->value.dim(i); }
  std::size_t size() const { return node_->value.size(); }

  bool requires_grad() const { return node_ && node_->requires_grad; }
  void set_requires_grad(bool r) const { node_->requires_grad = r; }
  bool is_leaf() const { return node_->is_leaf; }

  bool has_grad() const { return node_->grad.size() == node_->value.size(); }
  const Tensor<T>& grad() const { return node_->grad; }
  Tensor<T>& grad_buffer() const { return node_->grad_buffer(); }
  void zero_grad() const {
    if (has_grad()) node_->grad.fill(T{0});
  }

  Node<T>* node() const { return node_.get(); }
  const std::shared_ptr<Node<T>>& shared() const { return node_; }

 private:
  std::shared_ptr<Node<T>> node_;
};

// Ordered record of executed ops. Each entry holds the adjoint of one op;
// entries are appended in execution order, so any op's inputs were produced
// by earlier entries.
template <typename T>
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // When disabled, ops run forward only and nothing is recorded.
  bool enabled() const { return enabled_; }
  void set_enabled(bool e) { enabled_ = e; }

  std::size_t size() const { return entries_.size(); }

  // Create a non-leaf output for an op. It requires grad iff recording is on
  // and any input requires grad.
  Var<T> make_output(Tensor<T> value, bool any_input_requires_grad) {
    Var<T> out = Var<T>::leaf(std::move(value), false);
    out.node()->is_leaf = false;
    if (enabled_ && any_input_requires_grad) {
      out.set_requires_grad(true);
      outputs_.push_back(out.shared());
    }
    return out;
  }

  void record(std::function<void()> adjoint) {
    entries_.push_back(std::move(adjoint));
  }

  // Seed d(output)/d(output) = 1 and run every adjoint once, newest first.
  // Intermediate gradients are reset first so repeated calls accumulate
  // only on leaves.
  void backward(Var<T>& output) {
    if (output.size() != 1) {
      throw ShapeError("backward requires a scalar output, got shape " +
                       shape_str(output.shape()));
    }
    if (!output.requires_grad()) {
      throw std::logic_error("backward on an output that does not require grad");
    }
    for (auto& n : outputs_) {
      if (n->grad.size() == n->value.size()) n->grad.fill(T{0});
    }
    output.grad_buffer()[0] += T{1};
    for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) (*it)();
  }

  void clear() {
    entries_.clear();
    outputs_.clear();
  }

 private:
  bool enabled_ = true;
  std::vector<std::function<void()>> entries_;
  std::vector<std::shared_ptr<Node<T>>> outputs_;
};

}  // namespace sanet
