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

#include "sanet/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <random>

#include "json.hpp"
#include "sanet/checkpoint.hpp"

namespace sanet {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

Dataset load_nonempty(const std::string& dir, const RunConfig& cfg) {
  Dataset d = load_dataset(dir);
  if (d.empty()) throw IoError("dataset " + dir + " has no images");
  if (cfg.resize > 0) {
    for (auto& s : d) s = resize(s, cfg.resize, cfg.resize);
  }
  return d;
}

Dataset synth_range(const RunConfig& cfg, std::size_t count, std::size_t first) {
  Dataset d = synth_dataset(cfg.synth, count, first);
  if (cfg.resize > 0) {
    for (auto& s : d) s = resize(s, cfg.resize, cfg.resize);
  }
  return d;
}

void check_sizes(const SANetConfig& model, const Dataset& d, const std::string& what) {
  for (const auto& s : d) {
    try {
      model.validate_input(s.image.dim(1), s.image.dim(2));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(what + " image '" + s.id + "': " + e.what());
    }
  }
}

// Unreadable or inconsistent checkpoints are file problems for the caller.
LoadedCheckpoint load_model(const fs::path& path) {
  try {
    return load_checkpoint(path);
  } catch (const std::invalid_argument& e) {
    throw IoError(e.what());
  }
}

}  // namespace

DataSplit prepare_data(const RunConfig& cfg) {
  DataSplit out;
  if (cfg.train_dir.empty()) {
    out.train = synth_range(cfg, cfg.train_count, 0);
    out.train_source = "synthetic";
  } else {
    out.train = load_nonempty(cfg.train_dir, cfg);
    out.train_source = cfg.train_dir;
  }
  if (!cfg.test_dir.empty()) {
    out.test = load_nonempty(cfg.test_dir, cfg);
    out.test_source = cfg.test_dir;
  } else if (cfg.train_dir.empty() && cfg.test_count > 0) {
    out.test = synth_range(cfg, cfg.test_count, cfg.train_count);
    out.test_source = "synthetic";
  } else {
    auto [kept, held] = split_holdout(out.train, cfg.holdout, cfg.seed);
    if (held.empty() || kept.empty()) throw ConfigError("data.holdout leaves an empty split");
    out.train = std::move(kept);
    out.test = std::move(held);
    out.test_source = "holdout";
  }
  check_sizes(cfg.model, out.train, "training");
  check_sizes(cfg.model, out.test, "test");
  return out;
}

Dataset prepare_test_data(const RunConfig& cfg) {
  if (!cfg.test_dir.empty()) return load_nonempty(cfg.test_dir, cfg);
  if (cfg.train_dir.empty() && cfg.test_count > 0) return synth_range(cfg, cfg.test_count, cfg.train_count);
  return prepare_data(cfg).test;
}

void Manifest::write(const fs::path& out, const RunConfig& config) const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["files"] = files;
  nlohmann::ordered_json c;
  for (const auto& k : config_schema()) c[k.name] = k.get(config);
  j["config"] = c;
  write_text(out / "manifest.json", j.dump(2) + "\n");
}

TrainRun run_train(const RunConfig& cfg, const fs::path& out, Manifest& manifest, const TrainHooks& hooks) {
  cfg.validate();
  const DataSplit data = prepare_data(cfg);
  fs::create_directories(out);
  SANet<float> net(cfg.model, cfg.seed);

  TrainHooks h = hooks;
  if (cfg.train.checkpoint_every > 0) {
    h.checkpoint_dir = out / "checkpoints";
    fs::create_directories(h.checkpoint_dir);
  }
  TrainRun run;
  run.result = train(net, data.train, data.test, cfg.train, h);
  run.params = net.params().trainable_count();

  write_text(out / "history.csv", history_csv(run.result.history));
  manifest.files.push_back("history.csv");
  if (cfg.train.checkpoint_every > 0) {
    for (std::size_t e = cfg.train.checkpoint_every; e <= cfg.train.epochs; e += cfg.train.checkpoint_every) {
      const std::string name = "checkpoints/epoch_" + std::to_string(e) + ".ckpt";
      if (fs::exists(out / name)) manifest.files.push_back(name);
    }
  }
  save_checkpoint(out / "model.ckpt", net, run.result.steps);
  manifest.files.push_back("model.ckpt");

  const MetricAccumulator acc =
      evaluate(net, data.test, cfg.train.threshold, cfg.train.match_radius, cfg.train.batch);
  run.test = acc.aggregate();
  write_text(out / "metrics.json", acc.to_json() + "\n");
  write_text(out / "metrics.csv", acc.to_csv());
  write_text(out / "config.ini", cfg.to_text());
  manifest.files.insert(manifest.files.end(), {"metrics.json", "metrics.csv", "config.ini"});
  return run;
}

MetricReport run_eval(const RunConfig& cfg, const fs::path& checkpoint, const fs::path& out,
                      Manifest& manifest) {
  cfg.validate();
  LoadedCheckpoint ck = load_model(checkpoint);
  const Dataset test = prepare_test_data(cfg);
  check_sizes(ck.net.config(), test, "test");
  fs::create_directories(out);
  const MetricAccumulator acc =
      evaluate(ck.net, test, cfg.train.threshold, cfg.train.match_radius, cfg.train.batch);
  write_text(out / "metrics.json", acc.to_json() + "\n");
  write_text(out / "metrics.csv", acc.to_csv());
  manifest.files.insert(manifest.files.end(), {"metrics.json", "metrics.csv"});
  return acc.aggregate();
}

std::string overlay_ppm(const Tensor<float>& image, const Mask& pred, const Mask* gt) {
  const std::size_t h = pred.dim(0), w = pred.dim(1);
  if (image.size() != h * w) throw ShapeError("overlay: image and mask sizes differ");
  if (gt && gt->shape() != pred.shape()) throw ShapeError("overlay: mask sizes differ");
  std::string out = "P6\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  auto inside = [&](const Mask& m, long r, long c) {
    return r >= 0 && c >= 0 && r < static_cast<long>(h) && c < static_cast<long>(w) && m[r * w + c];
  };
  for (std::size_t i = 0; i < h * w; ++i) {
    const auto g = static_cast<unsigned>(std::lround(std::clamp(static_cast<double>(image[i]), 0.0, 1.0) * 255));
    unsigned rgb[3] = {g, g, g};
    if (pred[i]) rgb[0] = 128 + g / 2, rgb[1] = g / 2, rgb[2] = g / 2;
    if (gt && (*gt)[i]) {
      const long r = static_cast<long>(i / w), c = static_cast<long>(i % w);
      if (!inside(*gt, r - 1, c) || !inside(*gt, r + 1, c) || !inside(*gt, r, c - 1) || !inside(*gt, r, c + 1)) {
        rgb[0] = 0, rgb[1] = 255, rgb[2] = 0;
      }
    }
    for (unsigned v : rgb) out.push_back(static_cast<char>(v));
  }
  return out;
}

void run_infer(const RunConfig& cfg, const fs::path& checkpoint, const std::vector<fs::path>& images,
               const std::vector<fs::path>& masks, const fs::path& out, Manifest& manifest) {
  if (images.empty()) throw ConfigError("infer: no input images");
  if (!masks.empty() && masks.size() != images.size()) {
    throw ConfigError("infer: give one mask per image or none");
  }
  LoadedCheckpoint ck = load_model(checkpoint);
  fs::create_directories(out);
  for (std::size_t i = 0; i < images.size(); ++i) {
    Sample s;
    s.id = images[i].stem().string();
    s.image = read_pgm(images[i]);
    s.mask = masks.empty() ? Tensor<float>(s.image.shape()) : read_pgm(masks[i]);
    if (s.mask.shape() != s.image.shape()) throw ConfigError("infer: mask size differs for " + s.id);
    if (cfg.resize > 0) s = resize(s, cfg.resize, cfg.resize);
    check_sizes(ck.net.config(), {s}, "input");
    const std::size_t h = s.image.dim(1), w = s.image.dim(2);
    const Tensor<float> prob = predict(ck.net, s.image.reshaped({1, 1, h, w}));
    const Mask pred = binarize(plane(prob, 0), cfg.train.threshold);
    write_pgm(out / (s.id + "_mask.pgm"), pred.cast<float>().reshaped({1, h, w}));
    const Mask gt = binarize(s.mask.reshaped({h, w}), 0.5);
    write_text(out / (s.id + "_overlay.ppm"), overlay_ppm(s.image, pred, masks.empty() ? nullptr : &gt));
    manifest.files.push_back(s.id + "_mask.pgm");
    manifest.files.push_back(s.id + "_overlay.ppm");
  }
}

void run_synth(const RunConfig& cfg, const fs::path& out, Manifest& manifest) {
  cfg.validate();
  auto emit = [&](const Dataset& d, const std::string& dir) {
    for (const auto& s : d) {
      save_sample(s, out / dir);
      manifest.files.push_back(dir + "/images/" + s.id + ".pgm");
      manifest.files.push_back(dir + "/masks/" + s.id + ".pgm");
    }
  };
  fs::create_directories(out);
  emit(synth_dataset(cfg.synth, cfg.train_count, 0), "train");
  if (cfg.test_count > 0) emit(synth_dataset(cfg.synth, cfg.test_count, cfg.train_count), "test");
}

std::string BenchResult::to_json() const {
  nlohmann::ordered_json j;
  j["params"] = params;
  j["flops"] = flops;
  j["input"] = {batch, 1, height, width};
  j["runs"] = runs_ms.size();
  j["median_ms"] = median_ms;
  j["runs_ms"] = runs_ms;
  return j.dump(2);
}

BenchResult run_bench(const RunConfig& cfg) {
  cfg.validate();
  BenchResult r;
  r.height = cfg.resize > 0 ? cfg.resize : cfg.synth.height;
  r.width = cfg.resize > 0 ? cfg.resize : cfg.synth.width;
  r.batch = cfg.bench_batch;
  SANet<float> net(cfg.model, cfg.seed);
  r.params = net.params().trainable_count();
  r.flops = net.cost(r.height, r.width).flops * r.batch;
  Tensor<float> x({r.batch, 1, r.height, r.width});
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<float> dist(0.0f, 1.0f);
  for (auto& v : x.values()) v = dist(rng);
  predict(net, x);  // warm-up
  for (std::size_t i = 0; i < cfg.bench_runs; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    predict(net, x);
    r.runs_ms.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
  }
  std::vector<double> sorted = r.runs_ms;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  r.median_ms = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  return r;
}

}  // namespace sanet
