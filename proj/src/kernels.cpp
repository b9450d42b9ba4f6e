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

#include "sanet/kernels.hpp"

#include <Eigen/Core>

#include <limits>
#include <string>

namespace sanet {

namespace {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMatrix<T>>;

bool is_pointwise(const Conv2dGeometry& g) {
  return g.kh == 1 && g.kw == 1 && g.stride == 1 && g.pad == Padding{};
}

// Output columns [lo, hi) whose input column ow*stride + kj - left lies
// inside [0, w).
inline void valid_span(std::size_t out_w, std::size_t stride, std::size_t kj,
                       std::size_t left, std::size_t w, std::size_t& lo, std::size_t& hi) {
  // smallest ow with ow*stride + kj >= left
  lo = kj >= left ? 0 : (left - kj + stride - 1) / stride;
  // largest ow with ow*stride + kj - left <= w - 1
  const std::size_t limit = w - 1 + left;
  hi = kj > limit ? 0 : std::min(out_w, (limit - kj) / stride + 1);
  if (lo > hi) lo = hi;
}

// Unfold one image [Cin, H, W] into columns [Cin*kh*kw, out_h*out_w].
template <typename T>
void im2col(const T* img, const Conv2dGeometry& g, T* col) {
  const std::size_t out_plane = g.out_h * g.out_w;
  for (std::size_t c = 0; c < g.cin; ++c) {
    const T* plane = img + c * g.h * g.w;
    for (std::size_t ki = 0; ki < g.kh; ++ki) {
      for (std::size_t kj = 0; kj < g.kw; ++kj) {
        T* row = col + ((c * g.kh + ki) * g.kw + kj) * out_plane;
        std::size_t lo, hi;
        valid_span(g.out_w, g.stride, kj, g.pad.left, g.w, lo, hi);
        for (std::size_t oh = 0; oh < g.out_h; ++oh) {
          const long ih = static_cast<long>(oh * g.stride + ki) - static_cast<long>(g.pad.top);
          T* dst = row + oh * g.out_w;
          if (ih < 0 || ih >= static_cast<long>(g.h) || lo == hi) {
            std::fill(dst, dst + g.out_w, T{0});
            continue;
          }
          const T* src = plane + static_cast<std::size_t>(ih) * g.w + kj - g.pad.left;
          std::fill(dst, dst + lo, T{0});
          if (g.stride == 1) {
            std::copy(src + lo, src + hi, dst + lo);
          } else {
            for (std::size_t ow = lo; ow < hi; ++ow) dst[ow] = src[ow * g.stride];
          }
          std::fill(dst + hi, dst + g.out_w, T{0});
        }
      }
    }
  }
}

// Adjoint of im2col: scatter-add columns back into the image gradient.
template <typename T>
void col2im(const T* col, const Conv2dGeometry& g, T* img) {
  const std::size_t out_plane = g.out_h * g.out_w;
  for (std::size_t c = 0; c < g.cin; ++c) {
    T* plane = img + c * g.h * g.w;
    for (std::size_t ki = 0; ki < g.kh; ++ki) {
      for (std::size_t kj = 0; kj < g.kw; ++kj) {
        const T* row = col + ((c * g.kh + ki) * g.kw + kj) * out_plane;
        std::size_t lo, hi;
        valid_span(g.out_w, g.stride, kj, g.pad.left, g.w, lo, hi);
        if (lo == hi) continue;
        for (std::size_t oh = 0; oh < g.out_h; ++oh) {
          const long ih = static_cast<long>(oh * g.stride + ki) - static_cast<long>(g.pad.top);
          if (ih < 0 || ih >= static_cast<long>(g.h)) continue;
          T* dst = plane + static_cast<std::size_t>(ih) * g.w + kj - g.pad.left;
          const T* src = row + oh * g.out_w;
          if (g.stride == 1) {
            for (std::size_t ow = lo; ow < hi; ++ow) dst[ow] += src[ow];
          } else {
            for (std::size_t ow = lo; ow < hi; ++ow) dst[ow * g.stride] += src[ow];
          }
        }
      }
    }
  }
}

}  // namespace

template <typename T>
Conv2dGeometry conv2d_geometry(const Tensor<T>& x, const Tensor<T>& w,
                               std::size_t stride, const Padding& pad) {
  require_nchw(x, "conv2d input");
  require_nchw(w, "conv2d weight");
  if (stride == 0) throw ShapeError("conv2d stride must be positive");
  Conv2dGeometry g{};
  g.n = x.dim(0);
  g.cin = x.dim(1);
  g.h = x.dim(2);
  g.w = x.dim(3);
  g.cout = w.dim(0);
  g.kh = w.dim(2);
  g.kw = w.dim(3);
  g.stride = stride;
  g.pad = pad;
  if (w.dim(1) != g.cin) {
    throw ShapeError("conv2d channel mismatch: input has Cin=" +
                     std::to_string(g.cin) + " (shape " + shape_str(x.shape()) +
                     ") but weight expects Cin=" + std::to_string(w.dim(1)) +
                     " (shape " + shape_str(w.shape()) + ")");
  }
  const std::size_t ph = g.h + pad.top + pad.bottom;
  const std::size_t pw = g.w + pad.left + pad.right;
  if (ph < g.kh || pw < g.kw) {
    throw ShapeError("conv2d kernel " + std::to_string(g.kh) + "x" +
                     std::to_string(g.kw) + " larger than padded input " +
                     std::to_string(ph) + "x" + std::to_string(pw));
  }
  g.out_h = (ph - g.kh) / stride + 1;
  g.out_w = (pw - g.kw) / stride + 1;
  return g;
}

namespace kernels {

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Tensor<T>& w,
                         const Tensor<T>* bias, std::size_t stride,
                         const Padding& pad) {
  const Conv2dGeometry g = conv2d_geometry(x, w, stride, pad);
  if (bias && bias->size() != g.cout) {
    throw ShapeError("conv2d bias length " + std::to_string(bias->size()) +
                     " does not match Cout=" + std::to_string(g.cout));
  }
  Tensor<T> y({g.n, g.cout, g.out_h, g.out_w});
  const std::size_t k = g.cin * g.kh * g.kw;
  const std::size_t plane = g.out_h * g.out_w;
  const bool pointwise = is_pointwise(g);
  std::vector<T> col(pointwise ? 0 : k * plane);
  ConstMatMap<T> wm(w.data(), static_cast<long>(g.cout), static_cast<long>(k));
  for (std::size_t n = 0; n < g.n; ++n) {
    const T* img = x.data() + n * g.cin * g.h * g.w;
    const T* cols = img;
    if (!pointwise) {
      im2col(img, g, col.data());
      cols = col.data();
    }
    ConstMatMap<T> cm(cols, static_cast<long>(k), static_cast<long>(plane));
    MatMap<T> ym(y.data() + n * g.cout * plane, static_cast<long>(g.cout),
                 static_cast<long>(plane));
    ym.noalias() = wm * cm;
    if (bias) {
      for (std::size_t c = 0; c < g.cout; ++c) {
        T* row = ym.data() + c * plane;
        const T b = (*bias)[c];
        for (std::size_t i = 0; i < plane; ++i) row[i] += b;
      }
    }
  }
  return y;
}

template <typename T>
void conv2d_backward(const Tensor<T>& x, const Tensor<T>& w,
                     const Tensor<T>& dy, std::size_t stride, const Padding& pad,
                     Tensor<T>* dx, Tensor<T>* dw, Tensor<T>* db) {
  const Conv2dGeometry g = conv2d_geometry(x, w, stride, pad);
  const std::size_t k = g.cin * g.kh * g.kw;
  const std::size_t plane = g.out_h * g.out_w;
  const bool pointwise = is_pointwise(g);
  // With stride 1 and padding below the kernel extent, the input gradient is
  // a plain convolution of dy with the flipped, transposed kernel. That
  // avoids the scatter-add of col2im.
  if (dx && !pointwise && stride == 1 && pad.top < g.kh && pad.bottom < g.kh &&
      pad.left < g.kw && pad.right < g.kw) {
    Tensor<T> wf({g.cin, g.cout, g.kh, g.kw});
    for (std::size_t co = 0; co < g.cout; ++co)
      for (std::size_t ci = 0; ci < g.cin; ++ci)
        for (std::size_t i = 0; i < g.kh; ++i)
          for (std::size_t j = 0; j < g.kw; ++j)
            wf.at(ci, co, g.kh - 1 - i, g.kw - 1 - j) = w.at(co, ci, i, j);
    const Padding full{g.kh - 1 - pad.top, g.kh - 1 - pad.bottom, g.kw - 1 - pad.left,
                       g.kw - 1 - pad.right};
    const Tensor<T> gx = conv2d_forward(dy, wf, static_cast<const Tensor<T>*>(nullptr), 1, full);
    for (std::size_t i = 0; i < gx.size(); ++i) (*dx)[i] += gx[i];
    dx = nullptr;
  }
  std::vector<T> col(pointwise || !dw ? 0 : k * plane);
  std::vector<T> dcol(pointwise || !dx ? 0 : k * plane);
  ConstMatMap<T> wm(w.data(), static_cast<long>(g.cout), static_cast<long>(k));
  for (std::size_t n = 0; n < g.n; ++n) {
    const T* img = x.data() + n * g.cin * g.h * g.w;
    ConstMatMap<T> dym(dy.data() + n * g.cout * plane, static_cast<long>(g.cout),
                       static_cast<long>(plane));
    if (db) {
      for (std::size_t c = 0; c < g.cout; ++c) {
        const T* row = dym.data() + c * plane;
        T acc{0};
        for (std::size_t i = 0; i < plane; ++i) acc += row[i];
        (*db)[c] += acc;
      }
    }
    if (dw) {
      const T* cols = img;
      if (!pointwise) {
        im2col(img, g, col.data());
        cols = col.data();
      }
      ConstMatMap<T> cm(cols, static_cast<long>(k), static_cast<long>(plane));
      MatMap<T> dwm(dw->data(), static_cast<long>(g.cout), static_cast<long>(k));
      dwm.noalias() += dym * cm.transpose();
    }
    if (dx) {
      T* dimg = dx->data() + n * g.cin * g.h * g.w;
      if (pointwise) {
        MatMap<T> dxm(dimg, static_cast<long>(k), static_cast<long>(plane));
        dxm.noalias() += wm.transpose() * dym;
      } else {
        MatMap<T> dcm(dcol.data(), static_cast<long>(k), static_cast<long>(plane));
        dcm.noalias() = wm.transpose() * dym;
        col2im(dcol.data(), g, dimg);
      }
    }
  }
}

template <typename T>
Tensor<T> max_pool2d_forward(const Tensor<T>& x, std::vector<std::size_t>& argmax) {
  require_nchw(x, "max_pool2d input");
  const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (h % 2 != 0 || w % 2 != 0) {
    throw ShapeError("max_pool2d requires even spatial extents, got " +
                     shape_str(x.shape()));
  }
  const std::size_t oh = h / 2, ow = w / 2;
  Tensor<T> y({n, c, oh, ow});
  argmax.assign(y.size(), 0);
  std::size_t o = 0;
  for (std::size_t p = 0; p < n * c; ++p) {
    const std::size_t base = p * h * w;
    for (std::size_t i = 0; i < oh; ++i) {
      for (std::size_t j = 0; j < ow; ++j, ++o) {
        std::size_t best = base + (2 * i) * w + 2 * j;
        T best_v = x[best];
        for (std::size_t di = 0; di < 2; ++di) {
          for (std::size_t dj = 0; dj < 2; ++dj) {
            const std::size_t idx = base + (2 * i + di) * w + 2 * j + dj;
            if (x[idx] > best_v) {
              best_v = x[idx];
              best = idx;
            }
          }
        }
        y[o] = best_v;
        argmax[o] = best;
      }
    }
  }
  return y;
}

namespace {

template <typename T>
void check_transposed(const Tensor<T>& x, const Tensor<T>& w) {
  require_nchw(x, "transposed_conv2d input");
  require_nchw(w, "transposed_conv2d weight");
  if (w.dim(0) != x.dim(1) || w.dim(2) != 2 || w.dim(3) != 2) {
    throw ShapeError("transposed_conv2d expects weight [Cin=" +
                     std::to_string(x.dim(1)) + ", Cout, 2, 2], got " +
                     shape_str(w.shape()));
  }
}

}  // namespace

template <typename T>
Tensor<T> transposed_conv2d_forward(const Tensor<T>& x, const Tensor<T>& w,
                                    const Tensor<T>* bias) {
  check_transposed(x, w);
  const std::size_t n = x.dim(0), cin = x.dim(1), h = x.dim(2), wd = x.dim(3);
  const std::size_t cout = w.dim(1);
  if (bias && bias->size() != cout) {
    throw ShapeError("transposed_conv2d bias length mismatch");
  }
  const std::size_t plane = h * wd;
  Tensor<T> y({n, cout, 2 * h, 2 * wd});
  std::vector<T> tmp(cout * 4 * plane);
  ConstMatMap<T> wm(w.data(), static_cast<long>(cin), static_cast<long>(cout * 4));
  MatMap<T> tm(tmp.data(), static_cast<long>(cout * 4), static_cast<long>(plane));
  for (std::size_t b = 0; b < n; ++b) {
    ConstMatMap<T> xm(x.data() + b * cin * plane, static_cast<long>(cin),
                      static_cast<long>(plane));
    tm.noalias() = wm.transpose() * xm;
    for (std::size_t co = 0; co < cout; ++co) {
      const T bv = bias ? (*bias)[co] : T{0};
      for (std::size_t a = 0; a < 2; ++a) {
        for (std::size_t e = 0; e < 2; ++e) {
          const T* src = tmp.data() + (co * 4 + a * 2 + e) * plane;
          for (std::size_t i = 0; i < h; ++i) {
            for (std::size_t j = 0; j < wd; ++j) {
              y.at(b, co, 2 * i + a, 2 * j + e) = src[i * wd + j] + bv;
            }
          }
        }
      }
    }
  }
  return y;
}

template <typename T>
void transposed_conv2d_backward(const Tensor<T>& x, const Tensor<T>& w,
                                const Tensor<T>& dy, Tensor<T>* dx,
                                Tensor<T>* dw, Tensor<T>* db) {
  check_transposed(x, w);
  const std::size_t n = x.dim(0), cin = x.dim(1), h = x.dim(2), wd = x.dim(3);
  const std::size_t cout = w.dim(1);
  const std::size_t plane = h * wd;
  std::vector<T> tmp(cout * 4 * plane);
  ConstMatMap<T> wm(w.data(), static_cast<long>(cin), static_cast<long>(cout * 4));
  ConstMatMap<T> tm(tmp.data(), static_cast<long>(cout * 4), static_cast<long>(plane));
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t co = 0; co < cout; ++co) {
      T bias_acc{0};
      for (std::size_t a = 0; a < 2; ++a) {
        for (std::size_t e = 0; e < 2; ++e) {
          T* dst = tmp.data() + (co * 4 + a * 2 + e) * plane;
          for (std::size_t i = 0; i < h; ++i) {
            for (std::size_t j = 0; j < wd; ++j) {
              const T g = dy.at(b, co, 2 * i + a, 2 * j + e);
              dst[i * wd + j] = g;
              bias_acc += g;
            }
          }
        }
      }
      if (db) (*db)[co] += bias_acc;
    }
    if (dx) {
      MatMap<T> dxm(dx->data() + b * cin * plane, static_cast<long>(cin),
                    static_cast<long>(plane));
      dxm.noalias() += wm * tm;
    }
    if (dw) {
      ConstMatMap<T> xm(x.data() + b * cin * plane, static_cast<long>(cin),
                        static_cast<long>(plane));
      MatMap<T> dwm(dw->data(), static_cast<long>(cin), static_cast<long>(cout * 4));
      dwm.noalias() += xm * tm.transpose();
    }
  }
}

#define SANET_INSTANTIATE_KERNELS(T)                                              \
  template Tensor<T> conv2d_forward<T>(const Tensor<T>&, const Tensor<T>&,      \
                                       const Tensor<T>*, std::size_t,           \
                                       const Padding&);                         \
  template void conv2d_backward<T>(const Tensor<T>&, const Tensor<T>&,          \
                                   const Tensor<T>&, std::size_t,               \
                                   const Padding&, Tensor<T>*, Tensor<T>*,      \
                                   Tensor<T>*);                                 \
  template Tensor<T> max_pool2d_forward<T>(const Tensor<T>&,                    \
                                           std::vector<std::size_t>&);          \
  template Tensor<T> transposed_conv2d_forward<T>(                              \
      const Tensor<T>&, const Tensor<T>&, const Tensor<T>*);                    \
  template void transposed_conv2d_backward<T>(const Tensor<T>&,                 \
                                              const Tensor<T>&,                 \
                                              const Tensor<T>&, Tensor<T>*,     \
                                              Tensor<T>*, Tensor<T>*);

SANET_INSTANTIATE_KERNELS(float)
SANET_INSTANTIATE_KERNELS(double)
#undef SANET_INSTANTIATE_KERNELS

}  // namespace kernels

template Conv2dGeometry conv2d_geometry<float>(const Tensor<float>&,
                                               const Tensor<float>&, std::size_t,
                                               const Padding&);
template Conv2dGeometry conv2d_geometry<double>(const Tensor<double>&,
                                                const Tensor<double>&,
                                                std::size_t, const Padding&);

}  // namespace sanet
