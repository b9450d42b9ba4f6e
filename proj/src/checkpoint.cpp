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

#include "sanet/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace sanet {

namespace {

constexpr char kMagic[] = "SANETCKPT";
constexpr std::size_t kMagicLen = sizeof(kMagic) - 1;

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const char*>(p);
    buf_.insert(buf_.end(), c, c + n);
  }
  void uint(std::uint64_t v, int width) {
    for (int i = 0; i < width; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void u8(std::uint8_t v) { uint(v, 1); }
  void u32(std::uint32_t v) { uint(v, 4); }
  void u64(std::uint64_t v) { uint(v, 8); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  const std::vector<char>& data() const { return buf_; }

 private:
  std::vector<char> buf_;
};

class Reader {
 public:
  Reader(std::vector<char> buf, std::string path) : buf_(std::move(buf)), path_(std::move(path)) {}
  std::uint64_t uint(int width) {
    need(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf_[pos_ + static_cast<std::size_t>(i)])) << (8 * i);
    }
    pos_ += static_cast<std::size_t>(width);
    return v;
  }
  std::uint8_t u8() { return static_cast<std::uint8_t>(uint(1)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(uint(4)); }
  std::uint64_t u64() { return uint(8); }
  std::string raw(std::size_t n) {
    need(n);
    std::string s(buf_.data() + pos_, n);
    pos_ += n;
    return s;
  }
  std::string str() { return raw(u32()); }
  std::size_t pos() const { return pos_; }
  std::size_t size() const { return buf_.size(); }
  const char* at(std::size_t p) const { return buf_.data() + p; }
  [[noreturn]] void fail(const std::string& what) const {
    throw std::invalid_argument("checkpoint " + path_ + ": " + what);
  }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > buf_.size()) fail("truncated");
  }
  std::vector<char> buf_;
  std::string path_;
  std::size_t pos_ = 0;
};

struct Entry {
  std::string name;
  Shape shape;
  std::uint64_t offset;
};

}  // namespace

std::string config_to_json(const SANetConfig& c) {
  nlohmann::json j{
      {"base_channels", c.base_channels},
      {"stages", c.stages},
      {"use_pinwheel", c.dsm.use_pinwheel},
      {"plain_branch_b", c.dsm.plain_branch_b},
      {"use_cbam", c.dsm.use_cbam},
      {"cbam_order", c.dsm.cbam_order == CbamOrder::ChannelFirst ? "channel_first" : "spatial_first"},
      {"reduction", c.dsm.reduction},
      {"min_hidden", c.dsm.min_hidden},
      {"use_safm", c.use_safm},
      {"safm_residual", c.safm.residual},
      {"lambda_learnable", c.safm.lambda_learnable},
  };
  return j.dump();
}

SANetConfig config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("model config: ") + e.what());
  }
  SANetConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "base_channels") c.base_channels = v.get<std::size_t>();
      else if (key == "stages") c.stages = v.get<std::size_t>();
      else if (key == "use_pinwheel") c.dsm.use_pinwheel = v.get<bool>();
      else if (key == "plain_branch_b") c.dsm.plain_branch_b = v.get<bool>();
      else if (key == "use_cbam") c.dsm.use_cbam = v.get<bool>();
      else if (key == "reduction") c.dsm.reduction = v.get<std::size_t>();
      else if (key == "min_hidden") c.dsm.min_hidden = v.get<std::size_t>();
      else if (key == "use_safm") c.use_safm = v.get<bool>();
      else if (key == "safm_residual") c.safm.residual = v.get<bool>();
      else if (key == "lambda_learnable") c.safm.lambda_learnable = v.get<bool>();
      else if (key == "cbam_order") {
        const auto s = v.get<std::string>();
        if (s == "channel_first") c.dsm.cbam_order = CbamOrder::ChannelFirst;
        else if (s == "spatial_first") c.dsm.cbam_order = CbamOrder::SpatialFirst;
        else throw std::invalid_argument("model config: unknown cbam_order '" + s + "'");
      } else {
        throw std::invalid_argument("model config: unknown key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("model config: ") + e.what());
  }
  c.validate();
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const SANet<float>& net, std::uint64_t step) {
  Writer w;
  w.bytes(kMagic, kMagicLen);
  w.u32(kCheckpointVersion);
  w.str(config_to_json(net.config()));
  w.u64(step);
  const auto& entries = net.params().entries();
  w.u32(static_cast<std::uint32_t>(entries.size()));
  std::uint64_t offset = 0;
  for (const auto& e : entries) {
    w.str(e.name);
    w.u8(0);
    w.u32(static_cast<std::uint32_t>(e.var.shape().size()));
    for (std::size_t d : e.var.shape()) w.u64(d);
    w.u64(offset);
    offset += 4 * e.var.size();
  }
  for (const auto& e : entries) {
    for (float v : e.var.value().values()) w.u32(std::bit_cast<std::uint32_t>(v));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out.write(w.data().data(), static_cast<std::streamsize>(w.data().size()));
  if (!out) throw IoError("failed writing checkpoint " + path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Reader r(std::move(buf), path.string());

  if (r.size() < kMagicLen || r.raw(kMagicLen) != std::string(kMagic, kMagicLen)) r.fail("bad magic");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) r.fail("unsupported version " + std::to_string(version));
  SANetConfig config;
  try {
    config = config_from_json(r.str());
  } catch (const std::invalid_argument& e) {
    r.fail(e.what());
  }
  const std::uint64_t step = r.u64();
  const std::uint32_t n = r.u32();
  std::vector<Entry> entries(n);
  for (auto& e : entries) {
    e.name = r.str();
    if (r.u8() != 0) r.fail("unsupported dtype for " + e.name);
    const std::uint32_t rank = r.u32();
    if (rank > 8) r.fail("implausible rank for " + e.name);
    for (std::uint32_t d = 0; d < rank; ++d) e.shape.push_back(static_cast<std::size_t>(r.u64()));
    e.offset = r.u64();
  }
  const std::size_t payload = r.pos();

  LoadedCheckpoint out{SANet<float>(config, 0), step};
  const auto& want = out.net.params().entries();
  if (want.size() != entries.size()) {
    r.fail("holds " + std::to_string(entries.size()) + " tensors, configuration expects " +
           std::to_string(want.size()));
  }
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const Entry& e = entries[i];
    const auto& target = want[i];
    if (e.name != target.name) r.fail("tensor " + std::to_string(i) + " is '" + e.name + "', expected '" + target.name + "'");
    if (e.shape != target.var.shape()) {
      r.fail("tensor '" + e.name + "' has shape " + shape_str(e.shape) + ", configuration expects " +
             shape_str(target.var.shape()));
    }
    const std::size_t count = shape_numel(e.shape);
    if (payload + e.offset + 4 * count > r.size()) r.fail("payload of '" + e.name + "' is truncated");
    Tensor<float>& dst = target.var.mutable_value();
    const char* src = r.at(payload + static_cast<std::size_t>(e.offset));
    for (std::size_t k = 0; k < count; ++k) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(src[4 * k + static_cast<std::size_t>(b)])) << (8 * b);
      dst[k] = std::bit_cast<float>(bits);
    }
  }
  return out;
}

}  // namespace sanet
