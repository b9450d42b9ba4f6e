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
#include <vector>

#include "sanet/config.hpp"
#include "sanet/metrics.hpp"
#include "sanet/trainer.hpp"

namespace sanet {

struct DataSplit {
  Dataset train;
  Dataset test;
  std::string train_source;  // "synthetic" or the directory
  std::string test_source;   // also "holdout"
};

// Training and test sets for a run. Test data comes from data.test_dir,
// else the synthetic scenes after the training ones, else a seeded
// hold-out split of the training set.
DataSplit prepare_data(const RunConfig& config);
// Only the test set; used by evaluation so training data is never read.
Dataset prepare_test_data(const RunConfig& config);

// Files written by a command, relative to its output directory, in the order
// they were produced.
struct Manifest {
  std::string command;
  std::vector<std::string> files;

  // Writes manifest.json with the file list and the resolved config.
  void write(const std::filesystem::path& out, const RunConfig& config) const;
};

struct TrainRun {
  TrainResult result;
  MetricReport test;
  std::size_t params = 0;
};

// Train from scratch, then evaluate on the test set. Writes history.csv,
// model.ckpt, metrics.json, metrics.csv, config.ini and (with a cadence)
// checkpoints/epoch_<n>.ckpt.
TrainRun run_train(const RunConfig& config, const std::filesystem::path& out, Manifest& manifest,
                   const TrainHooks& hooks = {});

// Evaluates a checkpoint on the test set; writes metrics.json and metrics.csv.
MetricReport run_eval(const RunConfig& config, const std::filesystem::path& checkpoint,
                      const std::filesystem::path& out, Manifest& manifest);

// Per image: <stem>_mask.pgm (0/255) and <stem>_overlay.ppm (grey image,
// predicted pixels tinted red, ground-truth outline in green when a mask
// is given).
void run_infer(const RunConfig& config, const std::filesystem::path& checkpoint,
               const std::vector<std::filesystem::path>& images,
               const std::vector<std::filesystem::path>& masks, const std::filesystem::path& out,
               Manifest& manifest);

// Synthetic training scenes under train/, test scenes under test/.
void run_synth(const RunConfig& config, const std::filesystem::path& out, Manifest& manifest);

struct BenchResult {
  std::size_t params = 0;
  std::uint64_t flops = 0;
  std::size_t height = 0, width = 0, batch = 0;
  std::vector<double> runs_ms;
  double median_ms = 0;

  std::string to_json() const;
};

BenchResult run_bench(const RunConfig& config);

// Single 8-bit greyscale render with the prediction tinted red and optional
// ground-truth outline; returns binary PPM bytes.
std::string overlay_ppm(const Tensor<float>& image, const Mask& pred, const Mask* gt = nullptr);

}  // namespace sanet
