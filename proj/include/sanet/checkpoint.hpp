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

#include <cstdint>
#include <filesystem>
#include <string>

#include "sanet/data.hpp"
#include "sanet/network.hpp"

namespace sanet {

// Layout (all integers little-endian):
//   "SANETCKPT"  u32 version
//   u32 length, config JSON
//   u64 training step
//   u32 entry count, then per entry:
//     u32 length, name; u8 dtype (0 = f32); u32 rank; u64 dims[rank];
//     u64 byte offset into the payload
//   payload: little-endian f32 values
// Every registered tensor is stored, running statistics included.
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string config_to_json(const SANetConfig& config);
// Throws std::invalid_argument on unknown keys or bad values.
SANetConfig config_from_json(const std::string& text);

void save_checkpoint(const std::filesystem::path& path, const SANet<float>& net,
                     std::uint64_t step = 0);

struct LoadedCheckpoint {
  SANet<float> net;
  std::uint64_t step = 0;
};

// Missing file: IoError. Wrong magic, version, names or shapes:
// std::invalid_argument.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace sanet
