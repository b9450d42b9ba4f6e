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

#include "sanet/dsm.hpp"

#include <algorithm>
#include <stdexcept>

namespace sanet {

namespace {
constexpr std::size_t kCascade[3] = {3, 5, 3};
}

template <typename T>
ChannelAttention<T> ChannelAttention<T>::make(Initializer& init, std::size_t channels,
                                              const DsmConfig& cfg) {
  const std::size_t hidden = std::max(channels / cfg.reduction, cfg.min_hidden);
  ChannelAttention a;
  a.fc1 = Conv<T>::make(init, channels, hidden, 1, 1, Padding{}, true);
  a.fc2 = Conv<T>::make(init, hidden, channels, 1, 1, Padding{}, true);
  return a;
}

template <typename T>
void ChannelAttention<T>::register_params(ParamRegistry<T>& reg,
                                          const std::string& prefix) const {
  fc1.register_params(reg, prefix + ".fc1");
  fc2.register_params(reg, prefix + ".fc2");
}

template <typename T>
SpatialAttention<T> SpatialAttention<T>::make(Initializer& init) {
  return {Conv<T>::make(init, 2, 1, 7, 7, Padding::same(3), true)};
}

template <typename T>
void SpatialAttention<T>::register_params(ParamRegistry<T>& reg,
                                          const std::string& prefix) const {
  conv7.register_params(reg, prefix);
}

template <typename T>
Var<T> channel_attention(Tape<T>& tape, const Var<T>& f, const ChannelAttention<T>& p) {
  auto mlp = [&](const Var<T>& v) { return p.fc2(tape, relu(tape, p.fc1(tape, v))); };
  Var<T> avg = mlp(reduce_spatial(tape, f, Reduce::Avg));
  Var<T> mx = mlp(reduce_spatial(tape, f, Reduce::Max));
  return sigmoid(tape, add(tape, avg, mx));
}

template <typename T>
Var<T> spatial_attention(Tape<T>& tape, const Var<T>& f, const SpatialAttention<T>& p) {
  Var<T> maps = concat_channels(tape, reduce_channels(tape, f, Reduce::Avg),
                                reduce_channels(tape, f, Reduce::Max));
  return sigmoid(tape, p.conv7(tape, maps));
}

template <typename T>
Dsm<T> Dsm<T>::make(Initializer& init, std::size_t in, std::size_t out,
                    const DsmConfig& cfg) {
  Dsm d;
  d.cfg = cfg;
  d.in_channels = in;
  d.out_channels = out;
  d.a0 = ConvBnRelu<T>::make(init, in, out, 3);
  d.a1 = ConvBnRelu<T>::make(init, out, out, 3);
  if (cfg.has_branch_b()) {
    std::size_t cin = in;
    for (std::size_t k : kCascade) {
      BranchStage<T> s;
      if (cfg.use_pinwheel) {
        s.pconv = PinwheelConv<T>::make(init, cin, out, k);
      } else {
        s.conv = Conv<T>::make(init, cin, out, 3, 3, Padding::same(1), true);
      }
      s.bn = BatchNorm<T>::make(out);
      d.b.push_back(std::move(s));
      cin = out;
    }
    d.fuse = ConvBnRelu<T>::make(init, 2 * out, out, 3);
  }
  if (cfg.use_cbam) {
    d.ch = ChannelAttention<T>::make(init, out, cfg);
    d.sp = SpatialAttention<T>::make(init);
  }
  return d;
}

template <typename T>
void Dsm<T>::register_params(ParamRegistry<T>& reg, const std::string& prefix) const {
  a0.register_params(reg, prefix + ".a0");
  a1.register_params(reg, prefix + ".a1");
  for (std::size_t j = 0; j < b.size(); ++j) {
    const std::string p = prefix + ".b" + std::to_string(j);
    if (b[j].pconv) b[j].pconv->register_params(reg, p + ".pconv");
    if (b[j].conv) b[j].conv->register_params(reg, p + ".conv");
    b[j].bn.register_params(reg, p + ".bn");
  }
  if (fuse) fuse->register_params(reg, prefix + ".fuse");
  if (ch) ch->register_params(reg, prefix + ".cbam.ch");
  if (sp) sp->register_params(reg, prefix + ".cbam.sp");
}

template <typename T>
std::size_t Dsm<T>::param_count() const {
  std::size_t n = a0.param_count() + a1.param_count();
  for (const auto& s : b) {
    n += s.bn.param_count();
    if (s.pconv) n += s.pconv->param_count();
    if (s.conv) n += s.conv->param_count();
  }
  if (fuse) n += fuse->param_count();
  if (ch) n += ch->param_count();
  if (sp) n += sp->param_count();
  return n;
}

template <typename T>
std::uint64_t Dsm<T>::macs(std::size_t h, std::size_t w) const {
  std::uint64_t n = a0.macs(h, w) + a1.macs(h, w);
  for (const auto& s : b) {
    if (s.pconv) n += s.pconv->macs(h, w);
    if (s.conv) n += s.conv->macs(h, w);
  }
  if (fuse) n += fuse->macs(h, w);
  if (ch) n += ch->macs();
  if (sp) n += sp->macs(h, w);
  return n;
}

template <typename T>
Var<T> dsm_features(Tape<T>& tape, const Var<T>& x, const Dsm<T>& p, bool training) {
  Var<T> a = p.a1(tape, p.a0(tape, x, training), training);
  if (p.b.empty()) return a;
  Var<T> bx = x;
  for (const auto& s : p.b) {
    Var<T> z = s.pconv ? pinwheel_forward(tape, bx, *s.pconv) : (*s.conv)(tape, bx);
    bx = relu(tape, s.bn(tape, z, training));
  }
  return (*p.fuse)(tape, concat_channels(tape, a, bx), training);
}

template <typename T>
Var<T> dsm_forward(Tape<T>& tape, const Var<T>& x, const Dsm<T>& p, bool training) {
  Var<T> f = dsm_features(tape, x, p, training);
  if (!p.ch) return f;
  if (p.cfg.cbam_order == CbamOrder::ChannelFirst) {
    Var<T> g = scale_channels(tape, f, channel_attention(tape, f, *p.ch));
    return mul(tape, spatial_attention(tape, g, *p.sp), g);
  }
  Var<T> g = mul(tape, spatial_attention(tape, f, *p.sp), f);
  return scale_channels(tape, g, channel_attention(tape, g, *p.ch));
}

#define SANET_INSTANTIATE_DSM(T)                                                       \
  template struct ChannelAttention<T>;                                                 \
  template struct SpatialAttention<T>;                                                 \
  template struct Dsm<T>;                                                              \
  template Var<T> channel_attention(Tape<T>&, const Var<T>&, const ChannelAttention<T>&); \
  template Var<T> spatial_attention(Tape<T>&, const Var<T>&, const SpatialAttention<T>&); \
  template Var<T> dsm_features(Tape<T>&, const Var<T>&, const Dsm<T>&, bool);          \
  template Var<T> dsm_forward(Tape<T>&, const Var<T>&, const Dsm<T>&, bool);

SANET_INSTANTIATE_DSM(float)
SANET_INSTANTIATE_DSM(double)
#undef SANET_INSTANTIATE_DSM

}  // namespace sanet
