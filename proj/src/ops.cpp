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

#include "sanet/ops.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace sanet {

namespace {

template <typename T>
bool any_grad(std::initializer_list<const Var<T>*> vars) {
  for (const Var<T>* v : vars) {
    if (v && *v && v->requires_grad()) return true;
  }
  return false;
}

template <typename T>
T sigmoid_scalar(T x) {
  if (x >= T{0}) return T{1} / (T{1} + std::exp(-x));
  const T e = std::exp(x);
  return e / (T{1} + e);
}

// Either identical shapes, or one side has one channel and is broadcast.
struct Broadcast {
  std::size_t n = 0, c = 0, plane = 0;
  bool a_single = false, b_single = false;
  bool same = false;
};

template <typename T>
Broadcast broadcast_plan(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
  Broadcast p;
  if (a.shape() == b.shape()) {
    p.same = true;
    return p;
  }
  auto fail = [&] {
    return ShapeError(std::string(op) + ": incompatible shapes " +
                      shape_str(a.shape()) + " and " + shape_str(b.shape()) +
                      " (only a 1-channel operand may be broadcast)");
  };
  if (a.rank() != 4 || b.rank() != 4) throw fail();
  if (a.dim(0) != b.dim(0) || a.dim(2) != b.dim(2) || a.dim(3) != b.dim(3)) {
    throw fail();
  }
  p.n = a.dim(0);
  p.plane = a.dim(2) * a.dim(3);
  if (a.dim(1) == 1) {
    p.a_single = true;
    p.c = b.dim(1);
  } else if (b.dim(1) == 1) {
    p.b_single = true;
    p.c = a.dim(1);
  } else {
    throw fail();
  }
  return p;
}

// Calls f(out_index, a_index, b_index) over the broadcast output.
template <typename F>
void for_each_broadcast(const Broadcast& p, std::size_t total, F&& f) {
  if (p.same) {
    for (std::size_t i = 0; i < total; ++i) f(i, i, i);
    return;
  }
  std::size_t o = 0;
  for (std::size_t n = 0; n < p.n; ++n) {
    for (std::size_t c = 0; c < p.c; ++c) {
      for (std::size_t s = 0; s < p.plane; ++s, ++o) {
        const std::size_t single = n * p.plane + s;
        f(o, p.a_single ? single : o, p.b_single ? single : o);
      }
    }
  }
}

template <typename T>
Shape broadcast_shape(const Broadcast& p, const Tensor<T>& a, const Tensor<T>& b) {
  if (p.same) return a.shape();
  return p.a_single ? b.shape() : a.shape();
}

}  // namespace

template <typename T>
Var<T> conv2d(Tape<T>& tape, const Var<T>& x, const Var<T>& weight,
              const Var<T>& bias, const Conv2dOptions& opt) {
  const Tensor<T>* b = bias ? &bias.value() : nullptr;
  Var<T> y = tape.make_output(
      kernels::conv2d_forward(x.value(), weight.value(), b, opt.stride, opt.pad),
      any_grad({&x, &weight, &bias}));
  if (y.requires_grad()) {
    tape.record([x, weight, bias, y, opt]() mutable {
      if (!y.has_grad()) return;
      kernels::conv2d_backward(
          x.value(), weight.value(), y.grad(), opt.stride, opt.pad,
          x.requires_grad() ? &x.grad_buffer() : nullptr,
          weight.requires_grad() ? &weight.grad_buffer() : nullptr,
          bias && bias.requires_grad() ? &bias.grad_buffer() : nullptr);
    });
  }
  return y;
}

template <typename T>
Var<T> max_pool2d(Tape<T>& tape, const Var<T>& x) {
  std::vector<std::size_t> argmax;
  Var<T> y = tape.make_output(kernels::max_pool2d_forward(x.value(), argmax),
                              any_grad({&x}));
  if (y.requires_grad()) {
    tape.record([x, y, argmax = std::move(argmax)]() mutable {
      if (!y.has_grad()) return;
      Tensor<T>& gx = x.grad_buffer();
      const Tensor<T>& gy = y.grad();
      for (std::size_t i = 0; i < argmax.size(); ++i) gx[argmax[i]] += gy[i];
    });
  }
  return y;
}

template <typename T>
Var<T> transposed_conv2d(Tape<T>& tape, const Var<T>& x, const Var<T>& weight,
                         const Var<T>& bias) {
  const Tensor<T>* b = bias ? &bias.value() : nullptr;
  Var<T> y = tape.make_output(
      kernels::transposed_conv2d_forward(x.value(), weight.value(), b),
      any_grad({&x, &weight, &bias}));
  if (y.requires_grad()) {
    tape.record([x, weight, bias, y]() mutable {
      if (!y.has_grad()) return;
      kernels::transposed_conv2d_backward(
          x.value(), weight.value(), y.grad(),
          x.requires_grad() ? &x.grad_buffer() : nullptr,
          weight.requires_grad() ? &weight.grad_buffer() : nullptr,
          bias && bias.requires_grad() ? &bias.grad_buffer() : nullptr);
    });
  }
  return y;
}

template <typename T>
Var<T> reduce_channels(Tape<T>& tape, const Var<T>& x, Reduce mode) {
  const Tensor<T>& xv = x.value();
  require_nchw(xv, "reduce_channels input");
  const std::size_t n = xv.dim(0), c = xv.dim(1), plane = xv.dim(2) * xv.dim(3);
  if (c == 0) throw ShapeError("reduce_channels needs at least one channel");
  Tensor<T> out({n, 1, xv.dim(2), xv.dim(3)});
  std::vector<std::size_t> arg(mode == Reduce::Max ? out.size() : 0);
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t s = 0; s < plane; ++s) {
      const std::size_t base = b * c * plane + s;
      if (mode == Reduce::Avg) {
        T acc{0};
        for (std::size_t ch = 0; ch < c; ++ch) acc += xv[base + ch * plane];
        out[b * plane + s] = acc / static_cast<T>(c);
      } else {
        std::size_t best = base;
        for (std::size_t ch = 1; ch < c; ++ch) {
          if (xv[base + ch * plane] > xv[best]) best = base + ch * plane;
        }
        out[b * plane + s] = xv[best];
        arg[b * plane + s] = best;
      }
    }
  }
  Var<T> y = tape.make_output(std::move(out), any_grad({&x}));
  if (y.requires_grad()) {
    tape.record([x, y, mode, n, c, plane, arg = std::move(arg)]() mutable {
      if (!y.has_grad()) return;
      Tensor<T>& gx = x.grad_buffer();
      const Tensor<T>& gy = y.grad();
      if (mode == Reduce::Max) {
        for (std::size_t i = 0; i < arg.size(); ++i) gx[arg[i]] += gy[i];
        return;
      }
      const T inv = T{1} / static_cast<T>(c);
      for (std::size_t b = 0; b < n; ++b) {
        for (std::size_t ch = 0; ch < c; ++ch) {
          T* dst = gx.data() + (b * c + ch) * plane;
          const T* src = gy.data() + b * plane;
          for (std::size_t s = 0; s < plane; ++s) dst[s] += src[s] * inv;
        }
      }
    });
  }
  return y;
}

template <typename T>
Var<T> reduce_spatial(Tape<T>& tape, const Var<T>& x, Reduce mode) {
  const Tensor<T>& xv = x.value();
  require_nchw(xv, "reduce_spatial input");
  const std::size_t nc = xv.dim(0) * xv.dim(1), plane = xv.dim(2) * xv.dim(3);
  if (plane == 0) throw ShapeError("reduce_spatial needs a non-empty plane");
  Tensor<T> out({xv.dim(0), xv.dim(1), 1, 1});
  std::vector<std::size_t> arg(mode == Reduce::Max ? nc : 0);
  for (std::size_t p = 0; p < nc; ++p) {
    const T* src = xv.data() + p * plane;
    if (mode == Reduce::Avg) {
      T acc{0};
      for (std::size_t s = 0; s < plane; ++s) acc += src[s];
      out[p] = acc / static_cast<T>(plane);
    } else {
      std::size_t best = 0;
      for (std::size_t s = 1; s < plane; ++s) {
        if (src[s] > src[best]) best = s;
      }
      out[p] = src[best];
      arg[p] = p * plane + best;
    }
  }
  Var<T> y = tape.make_output(std::move(out), any_grad({&x}));
  if (y.requires_grad()) {
    tape.record([x, y, mode, nc, plane, arg = std::move(arg)]() mutable {
      if (!y.has_grad()) return;
      Tensor<T>& gx = x.grad_buffer();
      const Tensor<T>& gy = y.grad();
      if (mode == Reduce::Max) {
        for (std::size_t p = 0; p < nc; ++p) gx[arg[p]] += gy[p];
        return;
      }
      const T inv = T{1} / static_cast<T>(plane);
      for (std::size_t p = 0; p < nc; ++p) {
        T* dst = gx.data() + p * plane;
        const T g = gy[p] * inv;
        for (std::size_t s = 0; s < plane; ++s) dst[s] += g;
      }
    });
  }
  return y;
}

template <typename T>
Var<T> add(Tape<T>& tape, const Var<T>& a, const Var<T>& b) {
  const Broadcast p = broadcast_plan(a.value(), b.value(), "add");
  Tensor<T> out(broadcast_shape(p, a.value(), b.value()));
  const Tensor<T>& av = a.value();
  const Tensor<T>& bv = b.value();
  for_each_broadcast(p, out.size(), [&](std::size_t o, std::size_t i, std::size_t j) {
    out[o] = av[i] + bv[j];
  });
  Var<T> y = tape.make_output(std::move(out), any_grad({&a, &b}));
  if (y.requires_grad()) {
    tape.record([a, b, y, p]() mutable {
      if (!y.has_grad()) return;
      const Tensor<T>& gy = y.grad();
      Tensor<T>* ga = a.requires_grad() ? &a.grad_buffer() : nullptr;
      Tensor<T>* gb = b.requires_grad() ? &b.grad_buffer() : nullptr;
      for_each_broadcast(p, gy.size(), [&](std::size_t o, std::size_t i, std::size_t j) {
        if (ga) (*ga)[i] += gy[o];
        if (gb) (*gb)[j] += gy[o];
      });
    });
  }
  return y;
}

template <typename T>
Var<T> mul(Tape<T>& tape, const Var<T>& a, const Var<T>& b) {
  const Broadcast p = broadcast_plan(a.value(), b.value(), "mul");
  Tensor<T> out(broadcast_shape(p, a.value(), b.value()));
  const Tensor<T>& av = a.value();
  const Tensor<T>& bv = b.value();
  for_each_broadcast(p, out.size(), [&](std::size_t o, std::size_t i, std::size_t j) {
    out[o] = av[i] * bv[j];
  });
  Var<T> y = tape.make_output(std::move(out), any_grad({&a, &b}));
  if (y.requires_grad()) {
    tape.record([a, b, y, p]() mutable {
      if (!y.has_grad()) return;
      const Tensor<T>& gy = y.grad();
      const Tensor<T>& av = a.value();
      const Tensor<T>& bv = b.value();
      Tensor<T>* ga = a.requires_grad() ? &a.grad_buffer() : nullptr;
      Tensor<T>* gb = b.requires_grad() ? &b.grad_buffer() : nullptr;
      for_each_broadcast(p, gy.size(), [&](std::size_t o, std::size_t i, std::size_t j) {
        if (ga) (*ga)[i] += gy[o] * bv[j];
        if (gb) (*gb)[j] += gy[o] * av[i];
      });
    });
  }
  return y;
}

template <typename T>
Var<T> scale_channels(Tape<T>& tape, const Var<T>& x, const Var<T>& gate) {
  const Tensor<T>& xv = x.value();
  const Tensor<T>& gv = gate.value();
  require_nchw(xv, "scale_channels input");
  if (gv.shape() != Shape{xv.dim(0), xv.dim(1), 1, 1}) {
    throw ShapeError("scale_channels gate must be [N,C,1,1] matching " +
                     shape_str(xv.shape()) + ", got " + shape_str(gv.shape()));
  }
  const std::size_t nc = xv.dim(0) * xv.dim(1), plane = xv.dim(2) * xv.dim(3);
  Tensor<T> out(xv.shape());
  for (std::size_t p = 0; p < nc; ++p) {
    for (std::size_t s = 0; s < plane; ++s) {
      out[p * plane + s] = xv[p * plane + s] * gv[p];
    }
  }
  Var<T> y = tape.make_output(std::move(out), any_grad({&x, &gate}));
  if (y.requires_grad()) {
    tape.record([x, gate, y, nc, plane]() mutable {
      if (!y.has_grad()) return;
      const Tensor<T>& gy = y.grad();
      const Tensor<T>& xv = x.value();
      const Tensor<T>& gv = gate.value();
      Tensor<T>* gx = x.requires_grad() ? &x.grad_buffer() : nullptr;
      Tensor<T>* gg = gate.requires_grad() ? &gate.grad_buffer() : nullptr;
      for (std::size_t p = 0; p < nc; ++p) {
        T acc{0};
        for (std::size_t s = 0; s < plane; ++s) {
          const std::size_t i = p * plane + s;
          if (gx) (*gx)[i] += gy[i] * gv[p];
          acc += gy[i] * xv[i];
        }
        if (gg) (*gg)[p] += acc;
      }
    });
  }
  return y;
}

template <typename T>
Var<T> sigmoid(Tape<T>& tape, const Var<T>& x) {
  Tensor<T> out(x.shape());
  const Tensor<T>& xv = x.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = sigmoid_scalar(xv[i]);
  Var<T> y = tape.make_output(std::move(out), any_grad({&x}));
  if (y.requires_grad()) {
    tape.record([x, y]() mutable {
      if (!y.has_grad()) return;
      Tensor<T>& gx = x.grad_buffer();
      const Tensor<T>& gy = y.grad();
      const Tensor<T>& yv = y.value();
      for (std::size_t i = 0; i < gx.size(); ++i) {
        gx[i] += gy[i] * yv[i] * (T{1} - yv[i]);
      }
    });
  }
  return y;
}

template <typename T>
Var<T> relu(Tape<T>& tape, const Var<T>& x) {
  Tensor<T> out(x.shape());
  const Tensor<T>& xv = x.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] > T{0} ? xv[i] : T{0};
  Var<T> y = tape.make_output(std::move(out), any_grad({&x}));
  if (y.requires_grad()) {
    tape.record([x, y]() mutable {
      if (!y.has_grad()) return;
      Tensor<T>& gx = x.grad_buffer();
      const Tensor<T>& gy = y.grad();
      const Tensor<T>& xv = x.value();
      for (std::size_t i = 0; i < gx.size(); ++i) {
        if (xv[i] > T{0}) gx[i] += gy[i];
      }
    });
  }
  return y;
}

template <typename T>
Var<T> concat_channels(Tape<T>& tape, const Var<T>& a, const Var<T>& b) {
  const Tensor<T>& av = a.value();
  const Tensor<T>& bv = b.value();
  require_nchw(av, "concat_channels lhs");
  require_nchw(bv, "concat_channels rhs");
  if (av.dim(0) != bv.dim(0) || av.dim(2) != bv.dim(2) || av.dim(3) != bv.dim(3)) {
    throw ShapeError("concat_channels: mismatched shapes " + shape_str(av.shape()) +
                     " and " + shape_str(bv.shape()));
  }
  const std::size_t n = av.dim(0);
  const std::size_t sa = av.dim(1) * av.dim(2) * av.dim(3);
  const std::size_t sb = bv.dim(1) * bv.dim(2) * bv.dim(3);
  Tensor<T> out({n, av.dim(1) + bv.dim(1), av.dim(2), av.dim(3)});
  for (std::size_t i = 0; i < n; ++i) {
    std::copy_n(av.data() + i * sa, sa, out.data() + i * (sa + sb));
    std::copy_n(bv.data() + i * sb, sb, out.data() + i * (sa + sb) + sa);
  }
  Var<T> y = tape.make_output(std::move(out), any_grad({&a, &b}));
  if (y.requires_grad()) {
    tape.record([a, b, y, n, sa, sb]() mutable {
      if (!y.has_grad()) return;
      const Tensor<T>& gy = y.grad();
      for (std::size_t i = 0; i < n; ++i) {
        const T* src = gy.data() + i * (sa + sb);
        if (a.requires_grad()) {
          T* dst = a.grad_buffer().data() + i * sa;
          for (std::size_t k = 0; k < sa; ++k) dst[k] += src[k];
        }
        if (b.requires_grad()) {
          T* dst = b.grad_buffer().data() + i * sb;
          for (std::size_t k = 0; k < sb; ++k) dst[k] += src[sa + k];
        }
      }
    });
  }
  return y;
}

template <typename T>
Var<T> slice_channels(Tape<T>& tape, const Var<T>& x, std::size_t begin,
                      std::size_t count) {
  const Tensor<T>& xv = x.value();
  require_nchw(xv, "slice_channels input");
  if (begin + count > xv.dim(1)) {
    throw ShapeError("slice_channels range [" + std::to_string(begin) + ", " +
                     std::to_string(begin + count) + ") exceeds " +
                     std::to_string(xv.dim(1)) + " channels");
  }
  const std::size_t n = xv.dim(0), c = xv.dim(1), plane = xv.dim(2) * xv.dim(3);
  Tensor<T> out({n, count, xv.dim(2), xv.dim(3)});
  for (std::size_t i = 0; i < n; ++i) {
    std::copy_n(xv.data() + (i * c + begin) * plane, count * plane,
                out.data() + i * count * plane);
  }
  Var<T> y = tape.make_output(std::move(out), any_grad({&x}));
  if (y.requires_grad()) {
    tape.record([x, y, n, c, plane, begin, count]() mutable {
      if (!y.has_grad()) return;
      Tensor<T>& gx = x.grad_buffer();
      const Tensor<T>& gy = y.grad();
      for (std::size_t i = 0; i < n; ++i) {
        T* dst = gx.data() + (i * c + begin) * plane;
        const T* src = gy.data() + i * count * plane;
        for (std::size_t k = 0; k < count * plane; ++k) dst[k] += src[k];
      }
    });
  }
  return y;
}

template <typename T>
Var<T> affine(Tape<T>& tape, const Var<T>& x, T a, T b) {
  Tensor<T> out(x.shape());
  const Tensor<T>& xv = x.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * xv[i] + b;
  Var<T> y = tape.make_output(std::move(out), any_grad({&x}));
  if (y.requires_grad()) {
    tape.record([x, y, a]() mutable {
      if (!y.has_grad()) return;
      Tensor<T>& gx = x.grad_buffer();
      const Tensor<T>& gy = y.grad();
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += a * gy[i];
    });
  }
  return y;
}

template <typename T>
Var<T> scale(Tape<T>& tape, const Var<T>& x, T s) {
  return affine(tape, x, s, T{0});
}

template <typename T>
Var<T> scale_by(Tape<T>& tape, const Var<T>& x, const Var<T>& s) {
  if (s.size() != 1) {
    throw ShapeError("scale_by expects a single-element scale, got " +
                     shape_str(s.shape()));
  }
  const T sv = s.value()[0];
  Tensor<T> out(x.shape());
  const Tensor<T>& xv = x.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = sv * xv[i];
  Var<T> y = tape.make_output(std::move(out), any_grad({&x, &s}));
  if (y.requires_grad()) {
    tape.record([x, s, y]() mutable {
      if (!y.has_grad()) return;
      const Tensor<T>& gy = y.grad();
      const Tensor<T>& xv = x.value();
      const T sv = s.value()[0];
      if (x.requires_grad()) {
        Tensor<T>& gx = x.grad_buffer();
        for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += sv * gy[i];
      }
      if (s.requires_grad()) {
        T acc{0};
        for (std::size_t i = 0; i < gy.size(); ++i) acc += gy[i] * xv[i];
        s.grad_buffer()[0] += acc;
      }
    });
  }
  return y;
}

template <typename T>
Var<T> sum(Tape<T>& tape, const Var<T>& x) {
  T acc{0};
  for (T v : x.value().values()) acc += v;
  Var<T> y = tape.make_output(Tensor<T>::scalar(acc), any_grad({&x}));
  if (y.requires_grad()) {
    tape.record([x, y]() mutable {
      if (!y.has_grad()) return;
      Tensor<T>& gx = x.grad_buffer();
      const T g = y.grad()[0];
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g;
    });
  }
  return y;
}

template <typename T>
Var<T> batch_norm(Tape<T>& tape, const Var<T>& x, const Var<T>& gamma,
                  const Var<T>& beta, Tensor<T>& running_mean,
                  Tensor<T>& running_var, const BatchNormOptions& opt) {
  const bool training = opt.training;
  const T momentum = static_cast<T>(opt.momentum);
  const T eps = static_cast<T>(opt.eps);
  const Tensor<T>& xv = x.value();
  require_nchw(xv, "batch_norm input");
  const std::size_t n = xv.dim(0), c = xv.dim(1), plane = xv.dim(2) * xv.dim(3);
  if (gamma.size() != c || beta.size() != c || running_mean.size() != c || running_var.size() != c) {
    throw ShapeError("batch_norm parameters do not match " + std::to_string(c) +
                     " channels");
  }
  const std::size_t count = n * plane;
  std::vector<T> mean(c), inv_std(c);
  if (training) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      T acc{0};
      for (std::size_t b = 0; b < n; ++b) {
        const T* src = xv.data() + (b * c + ch) * plane;
        for (std::size_t s = 0; s < plane; ++s) acc += src[s];
      }
      const T m = acc / static_cast<T>(count);
      T var{0};
      for (std::size_t b = 0; b < n; ++b) {
        const T* src = xv.data() + (b * c + ch) * plane;
        for (std::size_t s = 0; s < plane; ++s) var += (src[s] - m) * (src[s] - m);
      }
      const T biased = var / static_cast<T>(count);
      const T unbiased = count > 1 ? var / static_cast<T>(count - 1) : biased;
      mean[ch] = m;
      inv_std[ch] = T{1} / std::sqrt(biased + eps);
      running_mean[ch] = (T{1} - momentum) * running_mean[ch] + momentum * m;
      running_var[ch] = (T{1} - momentum) * running_var[ch] + momentum * unbiased;
    }
  } else {
    for (std::size_t ch = 0; ch < c; ++ch) {
      mean[ch] = running_mean[ch];
      inv_std[ch] = T{1} / std::sqrt(running_var[ch] + eps);
    }
  }
  Tensor<T> xhat(xv.shape());
  Tensor<T> out(xv.shape());
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      const std::size_t off = (b * c + ch) * plane;
      const T g = gamma.value()[ch], be = beta.value()[ch];
      for (std::size_t s = 0; s < plane; ++s) {
        const T h = (xv[off + s] - mean[ch]) * inv_std[ch];
        xhat[off + s] = h;
        out[off + s] = g * h + be;
      }
    }
  }
  Var<T> y = tape.make_output(std::move(out), any_grad({&x, &gamma, &beta}));
  if (y.requires_grad()) {
    tape.record([x, gamma, beta, y, training, n, c, plane, count,
                 inv_std = std::move(inv_std), xhat = std::move(xhat)]() mutable {
      if (!y.has_grad()) return;
      const Tensor<T>& gy = y.grad();
      for (std::size_t ch = 0; ch < c; ++ch) {
        T sum_g{0}, sum_gh{0};
        for (std::size_t b = 0; b < n; ++b) {
          const std::size_t off = (b * c + ch) * plane;
          for (std::size_t s = 0; s < plane; ++s) {
            sum_g += gy[off + s];
            sum_gh += gy[off + s] * xhat[off + s];
          }
        }
        if (gamma.requires_grad()) gamma.grad_buffer()[ch] += sum_gh;
        if (beta.requires_grad()) beta.grad_buffer()[ch] += sum_g;
        if (!x.requires_grad()) continue;
        Tensor<T>& gx = x.grad_buffer();
        const T scale = gamma.value()[ch] * inv_std[ch];
        const T inv_count = T{1} / static_cast<T>(count);
        for (std::size_t b = 0; b < n; ++b) {
          const std::size_t off = (b * c + ch) * plane;
          for (std::size_t s = 0; s < plane; ++s) {
            if (training) {
              gx[off + s] += scale * (gy[off + s] - sum_g * inv_count -
                                      xhat[off + s] * sum_gh * inv_count);
            } else {
              gx[off + s] += scale * gy[off + s];
            }
          }
        }
      }
    });
  }
  return y;
}

#define SANET_INSTANTIATE_OPS(T)                                                   \
  template Var<T> conv2d<T>(Tape<T>&, const Var<T>&, const Var<T>&,               \
                            const Var<T>&, const Conv2dOptions&);                 \
  template Var<T> max_pool2d<T>(Tape<T>&, const Var<T>&);                         \
  template Var<T> transposed_conv2d<T>(Tape<T>&, const Var<T>&, const Var<T>&,    \
                                       const Var<T>&);                            \
  template Var<T> reduce_channels<T>(Tape<T>&, const Var<T>&, Reduce);            \
  template Var<T> reduce_spatial<T>(Tape<T>&, const Var<T>&, Reduce);             \
  template Var<T> add<T>(Tape<T>&, const Var<T>&, const Var<T>&);                 \
  template Var<T> mul<T>(Tape<T>&, const Var<T>&, const Var<T>&);                 \
  template Var<T> scale_channels<T>(Tape<T>&, const Var<T>&, const Var<T>&);      \
  template Var<T> sigmoid<T>(Tape<T>&, const Var<T>&);                            \
  template Var<T> relu<T>(Tape<T>&, const Var<T>&);                               \
  template Var<T> concat_channels<T>(Tape<T>&, const Var<T>&, const Var<T>&);     \
  template Var<T> slice_channels<T>(Tape<T>&, const Var<T>&, std::size_t,         \
                                    std::size_t);                                 \
  template Var<T> scale<T>(Tape<T>&, const Var<T>&, T);                           \
  template Var<T> affine<T>(Tape<T>&, const Var<T>&, T, T);                       \
  template Var<T> scale_by<T>(Tape<T>&, const Var<T>&, const Var<T>&);            \
  template Var<T> sum<T>(Tape<T>&, const Var<T>&);                                \
  template Var<T> batch_norm<T>(Tape<T>&, const Var<T>&, const Var<T>&,           \
                                const Var<T>&, Tensor<T>&, Tensor<T>&,          \
                                const BatchNormOptions&);

SANET_INSTANTIATE_OPS(float)
SANET_INSTANTIATE_OPS(double)
#undef SANET_INSTANTIATE_OPS

}  // namespace sanet
