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

#include "sanet/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace sanet {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const char* key, const std::string& v, const char* want) {
  throw ConfigError(std::string(key) + ": '" + v + "' is not " + want);
}

std::size_t parse_size(const char* key, const std::string& v) {
  std::size_t out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) bad_value(key, v, "a non-negative integer");
  return out;
}

std::uint64_t parse_u64(const char* key, const std::string& v) {
  std::uint64_t out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) bad_value(key, v, "a non-negative integer");
  return out;
}

double parse_dbl(const char* key, const std::string& v) {
  double out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size() || !std::isfinite(out)) {
    bad_value(key, v, "a finite number");
  }
  return out;
}

bool parse_bool(const char* key, const std::string& v) {
  std::string s = v;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  bad_value(key, v, "a boolean (true/false)");
}

std::string parse_str(const char*, const std::string& v) { return v; }

CbamOrder parse_order(const char* key, const std::string& v) {
  if (v == "channel_first") return CbamOrder::ChannelFirst;
  if (v == "spatial_first") return CbamOrder::SpatialFirst;
  bad_value(key, v, "channel_first or spatial_first");
}

std::string fmt_size(std::size_t v) { return std::to_string(v); }
std::string fmt_u64(std::uint64_t v) { return std::to_string(v); }
std::string fmt_dbl(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}
std::string fmt_bool(bool v) { return v ? "true" : "false"; }
std::string fmt_str(const std::string& v) { return v; }
std::string fmt_order(CbamOrder o) { return o == CbamOrder::ChannelFirst ? "channel_first" : "spatial_first"; }

#define SANET_KEY(name, kind, field, help)                                                   \
  ConfigKey {                                                                                \
    name, help, [](const RunConfig& c) { return fmt_##kind(c.field); },                      \
        [](RunConfig& c, const std::string& v) { c.field = parse_##kind(name, v); }          \
  }

const std::vector<ConfigKey> kSchema = {
    SANET_KEY("seed", u64, seed, "Seed for weight initialisation, shuffling and augmentation."),

    SANET_KEY("model.base_channels", size, model.base_channels, "Width of the first stage; stage i has base * 2^i channels. Multiple of 4."),
    SANET_KEY("model.stages", size, model.stages, "Encoder stages. Inputs must be divisible by 2^(stages-1) and leave >= 7 px at the bottleneck."),
    SANET_KEY("model.use_pinwheel", bool, model.dsm.use_pinwheel, "Pinwheel-convolution branch in every encoder block."),
    SANET_KEY("model.plain_branch_b", bool, model.dsm.plain_branch_b, "With use_pinwheel = false: keep a second branch of plain 3x3 convs."),
    SANET_KEY("model.use_cbam", bool, model.dsm.use_cbam, "Channel and spatial attention after the branch fusion."),
    SANET_KEY("model.cbam_order", order, model.dsm.cbam_order, "channel_first or spatial_first."),
    SANET_KEY("model.reduction", size, model.dsm.reduction, "Channel-attention reduction ratio."),
    SANET_KEY("model.min_hidden", size, model.dsm.min_hidden, "Smallest hidden width of the channel-attention MLP."),
    SANET_KEY("model.use_safm", bool, model.use_safm, "Attention fusion on skips; false gives plain concatenation."),
    SANET_KEY("model.safm_residual", bool, model.safm.residual, "Keep the identity term of the fusion output."),
    SANET_KEY("model.lambda_learnable", bool, model.safm.lambda_learnable, "Learn the fusion strength (starts at 0); false fixes it at 1."),

    SANET_KEY("train.lr0", dbl, train.lr0, "Initial learning rate."),
    SANET_KEY("train.eta_min", dbl, train.eta_min, "Final learning rate of the cosine schedule."),
    SANET_KEY("train.epochs", size, train.epochs, "Training epochs."),
    SANET_KEY("train.batch", size, train.batch, "Images per optimizer step."),
    SANET_KEY("train.beta1", dbl, train.beta1, "Adam first-moment decay."),
    SANET_KEY("train.beta2", dbl, train.beta2, "Adam second-moment decay."),
    SANET_KEY("train.adam_eps", dbl, train.adam_eps, "Adam denominator epsilon."),
    SANET_KEY("train.clip_norm", dbl, train.clip_norm, "Global gradient-norm clip; 0 disables."),
    SANET_KEY("train.augment", bool, train.augment, "Random horizontal and vertical flips."),
    SANET_KEY("train.loss_eps", dbl, train.loss_eps, "Smoothing term of the Soft-IoU loss."),
    SANET_KEY("train.checkpoint_every", size, train.checkpoint_every, "Epochs between intermediate checkpoints; 0 writes only the final one."),
    SANET_KEY("train.eval_every", size, train.eval_every, "Epochs between test-set evaluations in the history; 0 disables."),

    SANET_KEY("eval.threshold", dbl, train.threshold, "Probability at or above which a pixel is foreground."),
    SANET_KEY("eval.match_radius", dbl, train.match_radius, "Centroid distance in pixels within which a prediction detects a target."),

    SANET_KEY("synth.height", size, synth.height, "Synthetic scene height."),
    SANET_KEY("synth.width", size, synth.width, "Synthetic scene width."),
    SANET_KEY("synth.targets_min", size, synth.targets_min, "Fewest targets per scene."),
    SANET_KEY("synth.targets_max", size, synth.targets_max, "Most targets per scene."),
    SANET_KEY("synth.amplitude_min", dbl, synth.amplitude_min, "Smallest target peak above background, in (0, 1]."),
    SANET_KEY("synth.amplitude_max", dbl, synth.amplitude_max, "Largest target peak above background, in (0, 1]."),
    SANET_KEY("synth.sigma_min", dbl, synth.sigma_min, "Smallest Gaussian sigma in pixels."),
    SANET_KEY("synth.sigma_max", dbl, synth.sigma_max, "Largest Gaussian sigma in pixels."),
    SANET_KEY("synth.background_level", dbl, synth.background_level, "Mean background intensity."),
    SANET_KEY("synth.clutter_amplitude", dbl, synth.clutter_amplitude, "Peak deviation of the smooth clutter field."),
    SANET_KEY("synth.noise_sigma", dbl, synth.noise_sigma, "Standard deviation of per-pixel white noise."),
    SANET_KEY("synth.seed", u64, synth.seed, "Scene generator seed; scene i depends only on (seed, i)."),

    SANET_KEY("data.train_dir", str, train_dir, "Dataset root with images/ and masks/ for training; empty uses synthetic scenes."),
    SANET_KEY("data.test_dir", str, test_dir, "Dataset root for evaluation; empty uses synthetic scenes or a hold-out split."),
    SANET_KEY("data.train_count", size, train_count, "Synthetic training scenes (indices 0 .. n-1)."),
    SANET_KEY("data.test_count", size, test_count, "Synthetic test scenes following the training ones; 0 holds out part of the training set."),
    SANET_KEY("data.holdout", dbl, holdout, "Fraction held out when no test set is given."),
    SANET_KEY("data.resize", size, resize, "Resize loaded images to this square size; 0 keeps them."),

    SANET_KEY("bench.runs", size, bench_runs, "Timed forward passes (median reported), at least 10."),
    SANET_KEY("bench.batch", size, bench_batch, "Images per timed forward pass."),
};

#undef SANET_KEY

const ConfigKey& find_key(const std::string& name) {
  for (const auto& k : kSchema) {
    if (k.name == name) return k;
  }
  throw ConfigError("unknown config key '" + name + "'");
}

}  // namespace

RunConfig::RunConfig() {
  model.stages = 4;
  train.seed = seed;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  find_key(key).set(*this, value);
  train.seed = seed;
}

std::string RunConfig::get(const std::string& key) const { return find_key(key).get(*this); }

void RunConfig::validate() const {
  try {
    model.validate();
    train.validate();
    synth.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  auto check_input = [&](std::size_t h, std::size_t w, const char* what) {
    try {
      model.validate_input(h, w);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string(what) + ": " + e.what());
    }
  };
  if (resize > 0) {
    check_input(resize, resize, "data.resize");
  } else if (train_dir.empty() || test_dir.empty()) {
    check_input(synth.height, synth.width, "synth size");
  }
  if (holdout < 0.0 || holdout >= 1.0) throw ConfigError("data.holdout must lie in [0, 1)");
  if (train_dir.empty() && train_count == 0) throw ConfigError("data.train_count must be > 0");
  if (test_dir.empty() && test_count == 0 && holdout == 0.0) {
    throw ConfigError("no test set: set data.test_dir, data.test_count or data.holdout");
  }
  if (bench_runs < 10) throw ConfigError("bench.runs must be >= 10");
  if (bench_batch == 0) throw ConfigError("bench.batch must be >= 1");
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto& k : kSchema) out += k.name + " = " + k.get(*this) + "\n";
  return out;
}

const std::vector<ConfigKey>& config_schema() { return kSchema; }

std::string config_help() {
  const RunConfig defaults;
  std::string out = "Config keys (file: key = value, '[section]' prefixes keys; --set key=value wins):\n";
  for (const auto& k : kSchema) {
    out += "  " + k.name + " (default " + (k.get(defaults).empty() ? "empty" : k.get(defaults)) + ")\n      " +
           k.help + "\n";
  }
  return out;
}

std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>>
parse_sections(const std::string& text) {
  std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>> out;
  out.emplace_back();
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
      }
      out.emplace_back(trim(line.substr(1, line.size() - 2)), std::vector<std::pair<std::string, std::string>>{});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    out.back().second.emplace_back(key, value);
  }
  if (out.front().second.empty()) out.erase(out.begin());
  return out;
}

std::vector<std::pair<std::string, std::string>> parse_key_values(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [section, entries] : parse_sections(text)) {
    for (const auto& [k, v] : entries) out.emplace_back(section.empty() ? k : section + "." + k, v);
  }
  return out;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    for (const auto& [k, v] : parse_key_values(ss.str())) base.set(k, v);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return base;
}

void apply_overrides(RunConfig& config, const std::vector<std::string>& kv) {
  for (const auto& item : kv) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + item + "' is not key=value");
    config.set(trim(item.substr(0, eq)), trim(item.substr(eq + 1)));
  }
}

}  // namespace sanet
