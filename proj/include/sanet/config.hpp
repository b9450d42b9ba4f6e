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
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sanet/data.hpp"
#include "sanet/network.hpp"
#include "sanet/trainer.hpp"

namespace sanet {

// Malformed configuration text, an unknown key or a value out of range.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  RunConfig();

  std::uint64_t seed = 1;  // model initialisation and training order
  SANetConfig model;
  TrainConfig train;
  SynthParams synth;

  // Dataset directories; empty means synthetic scenes.
  std::string train_dir;
  std::string test_dir;
  std::size_t train_count = 200;  // synthetic scenes 0 .. train_count-1
  std::size_t test_count = 50;    // the next test_count scenes; 0 holds out part of train
  double holdout = 0.2;
  std::size_t resize = 0;         // square side for loaded images; 0 keeps the size

  std::size_t bench_runs = 10;
  std::size_t bench_batch = 1;

  // Applies one key = value pair through the schema.
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;

  // Cross-field checks (model, training, synthesis, input size).
  void validate() const;

  // Every key, one "key = value" line each, in schema order.
  std::string to_text() const;
};

struct ConfigKey {
  std::string name;
  std::string help;
  std::string (*get)(const RunConfig&);
  void (*set)(RunConfig&, const std::string&);
};

// The single list of recognised keys; help text and parsing derive from it.
const std::vector<ConfigKey>& config_schema();
std::string config_help();

// "key = value" lines. '#' and ';' start comments. A "[name]" line prefixes
// the following keys with "name.". Returns the pairs in file order.
std::vector<std::pair<std::string, std::string>> parse_key_values(const std::string& text);
// Sections of the same format, in order: [(section, [(key, value)])].
std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>>
parse_sections(const std::string& text);

// Reads a config file (IoError when missing) and applies its entries on
// top of `base`.
RunConfig load_config(const std::filesystem::path& path, RunConfig base = RunConfig{});
void apply_overrides(RunConfig& config, const std::vector<std::string>& key_equals_value);

}  // namespace sanet
