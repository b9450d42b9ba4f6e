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

#include "sanet/pinwheel.hpp"

#include <stdexcept>

namespace sanet {

template <typename T>
PinwheelConv<T> PinwheelConv<T>::make(Initializer& init, std::size_t in,
                                       std::size_t out, std::size_t k) {
  if (out == 0 || out % 4 != 0) {
    throw std::invalid_argument("pinwheel out_channels must be a positive multiple of 4, got " +
                                std::to_string(out));
  }
  if (k == 0 || k % 2 == 0) {
    throw std::invalid_argument("pinwheel kernel extent must be odd, got " + std::to_string(k));
  }
  const std::size_t q = out / 4;
  const std::size_t e = k - 1;
  PinwheelConv p;
  p.in_channels = in;
  p.out_channels = out;
  p.k = k;
  p.hl = Conv<T>::make(init, in, q, 1, k, Padding{0, 0, e, 0}, true);
  p.hr = Conv<T>::make(init, in, q, 1, k, Padding{0, 0, 0, e}, true);
  p.vt = Conv<T>::make(init, in, q, k, 1, Padding{e, 0, 0, 0}, true);
  p.vb = Conv<T>::make(init, in, q, k, 1, Padding{0, e, 0, 0}, true);
  p.fuse = Conv<T>::make(init, out, out, 1, 1, Padding{}, false);
  return p;
}

template <typename T>
void PinwheelConv<T>::register_params(ParamRegistry<T>& reg,
                                      const std::string& prefix) const {
  hl.register_params(reg, prefix + ".hl");
  hr.register_params(reg, prefix + ".hr");
  vt.register_params(reg, prefix + ".vt");
  vb.register_params(reg, prefix + ".vb");
  fuse.register_params(reg, prefix + ".fuse");
}

template <typename T>
std::size_t PinwheelConv<T>::param_count() const {
  return hl.param_count() + hr.param_count() + vt.param_count() + vb.param_count() +
         fuse.param_count();
}

template <typename T>
std::uint64_t PinwheelConv<T>::macs(std::size_t h, std::size_t w) const {
  return hl.macs(h, w) + hr.macs(h, w) + vt.macs(h, w) + vb.macs(h, w) + fuse.macs(h, w);
}

template <typename T>
Var<T> pinwheel_forward(Tape<T>& tape, const Var<T>& x, const PinwheelConv<T>& p) {
  if (x.value().rank() != 4 || x.dim(1) != p.in_channels) {
    throw ShapeError("pinwheel expects " + std::to_string(p.in_channels) +
                     " input channels, got shape " + shape_str(x.shape()));
  }
  Var<T> left = p.hl(tape, x);
  Var<T> right = p.hr(tape, x);
  Var<T> top = p.vt(tape, x);
  Var<T> bottom = p.vb(tape, x);
  Var<T> cat = concat_channels(tape, concat_channels(tape, left, right),
                               concat_channels(tape, top, bottom));
  return p.fuse(tape, cat);
}

template struct PinwheelConv<float>;
template struct PinwheelConv<double>;
template Var<float> pinwheel_forward(Tape<float>&, const Var<float>&,
                                     const PinwheelConv<float>&);
template Var<double> pinwheel_forward(Tape<double>&, const Var<double>&,
                                      const PinwheelConv<double>&);

}  // namespace sanet
