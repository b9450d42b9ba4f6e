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

#include "sanet/safm.hpp"

namespace sanet {

template <typename T>
Safm<T> Safm<T>::make(Initializer& init, std::size_t channels, const SafmConfig& cfg) {
  Safm s;
  s.cfg = cfg;
  s.channels = channels;
  s.conv7 = Conv<T>::make(init, 2, 1, 7, 7, Padding::same(3), true);
  s.conv1 = Conv<T>::make(init, channels, 2 * channels, 1, 1, Padding{}, true);
  s.lambda = Var<T>::leaf(Tensor<T>::scalar(cfg.lambda_learnable ? T{0} : T{1}),
                          cfg.lambda_learnable);
  return s;
}

template <typename T>
void Safm<T>::register_params(ParamRegistry<T>& reg, const std::string& prefix) const {
  conv7.register_params(reg, prefix + ".conv7");
  conv1.register_params(reg, prefix + ".conv1");
  reg.add(prefix + ".lambda", lambda, cfg.lambda_learnable && cfg.residual);
}

template <typename T>
std::size_t Safm<T>::param_count() const {
  return conv7.param_count() + conv1.param_count() +
         (cfg.lambda_learnable && cfg.residual ? 1 : 0);
}

template <typename T>
std::uint64_t Safm<T>::macs(std::size_t h, std::size_t w) const {
  return conv7.macs(h, w) + conv1.macs(h, w);
}

template <typename T>
SafmTrace<T> safm_trace(Tape<T>& tape, const Var<T>& enc, const Var<T>& dec,
                        const Safm<T>& p) {
  if (enc.shape() != dec.shape()) {
    throw ShapeError("SAFM needs encoder and decoder features of equal shape, got " +
                     shape_str(enc.shape()) + " and " + shape_str(dec.shape()));
  }
  if (enc.value().rank() != 4 || enc.dim(1) != p.channels) {
    throw ShapeError("SAFM built for " + std::to_string(p.channels) +
                     " channels, got " + shape_str(enc.shape()));
  }
  SafmTrace<T> t;
  t.x = concat_channels(tape, enc, dec);
  Var<T> pooled = concat_channels(tape, reduce_channels(tape, t.x, Reduce::Avg),
                                  reduce_channels(tape, t.x, Reduce::Max));
  t.saf = p.conv7(tape, pooled);
  t.e_weight = sigmoid(tape, t.saf);
  t.d_weight = sigmoid(tape, affine(tape, t.saf, T{-1}, T{1}));
  t.y = add(tape, mul(tape, t.e_weight, enc), mul(tape, t.d_weight, dec));
  Var<T> gated = mul(tape, p.conv1(tape, t.y), t.x);
  t.out = p.cfg.residual ? add(tape, scale_by(tape, gated, p.lambda), t.x) : gated;
  return t;
}

template <typename T>
Var<T> safm_forward(Tape<T>& tape, const Var<T>& enc, const Var<T>& dec, const Safm<T>& p) {
  return safm_trace(tape, enc, dec, p).out;
}

template struct Safm<float>;
template struct Safm<double>;
template SafmTrace<float> safm_trace(Tape<float>&, const Var<float>&, const Var<float>&,
                                     const Safm<float>&);
template SafmTrace<double> safm_trace(Tape<double>&, const Var<double>&,
                                      const Var<double>&, const Safm<double>&);
template Var<float> safm_forward(Tape<float>&, const Var<float>&, const Var<float>&,
                                 const Safm<float>&);
template Var<double> safm_forward(Tape<double>&, const Var<double>&, const Var<double>&,
                                  const Safm<double>&);

}  // namespace sanet
