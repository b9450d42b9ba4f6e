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
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sanet/tensor.hpp"

namespace sanet {

// A file that is missing, unreadable or malformed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Sample {
  Tensor<float> image;  // [1, H, W], values in [0, 1]
  Tensor<float> mask;   // [1, H, W], values in {0, 1}
  std::string id;

  std::size_t height() const { return image.dim(1); }
  std::size_t width() const { return image.dim(2); }
};

using Dataset = std::vector<Sample>;

struct SynthParams {
  std::size_t height = 64;
  std::size_t width = 64;
  std::size_t targets_min = 1;
  std::size_t targets_max = 3;
  double amplitude_min = 0.3;
  double amplitude_max = 0.7;
  // Below ~0.6 px a target centred between pixels has no pixel at half peak.
  double sigma_min = 0.7;
  double sigma_max = 1.2;
  double background_level = 0.25;
  double clutter_amplitude = 0.12;  // peak deviation of the smooth field
  double noise_sigma = 0.02;
  std::uint64_t seed = 1;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

// The Gaussians that make up one scene, in generation order.
struct SynthTarget {
  double row, col;  // centre in pixel coordinates
  double amplitude;
  double sigma;
};

// Deterministic in (params.seed, index).
Sample synth_scene(const SynthParams& params, std::size_t index,
                   std::vector<SynthTarget>* targets = nullptr);
Dataset synth_dataset(const SynthParams& params, std::size_t count, std::size_t first_index = 0);

// Binary PGM (P5), maxval up to 65535. Values are scaled by maxval.
Tensor<float> read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const Tensor<float>& image,
               std::uint16_t maxval = 255);

// root/images/<stem>.pgm paired with root/masks/<stem>.pgm, sorted by stem.
// A missing root is an IoError; a root without images/ is an empty dataset.
Dataset load_dataset(const std::filesystem::path& root);
void save_sample(const Sample& sample, const std::filesystem::path& root);

// Bilinear image (half-pixel centres, edge clamp), nearest-neighbour mask.
Sample resize(const Sample& sample, std::size_t out_h, std::size_t out_w);

// Independent fair coin flips for horizontal and vertical mirroring.
Sample augment_flip(const Sample& sample, std::mt19937_64& rng);
Sample flip(const Sample& sample, bool horizontal, bool vertical);

// Stack samples[idx] into [N, 1, H, W] image and mask tensors.
std::pair<Tensor<float>, Tensor<float>> make_batch(const Dataset& samples,
                                                   const std::vector<std::size_t>& idx);

// Seeded shuffle, then the last `fraction` of the items become the second
// set.
std::pair<Dataset, Dataset> split_holdout(const Dataset& all, double fraction, std::uint64_t seed);

}  // namespace sanet
