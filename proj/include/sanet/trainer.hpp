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
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sanet/data.hpp"
#include "sanet/layers.hpp"
#include "sanet/metrics.hpp"
#include "sanet/network.hpp"

namespace sanet {

// A NaN or infinity reached the optimizer or the loss.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainConfig {
  double lr0 = 1e-3;
  std::size_t epochs = 50;
  std::size_t batch = 8;
  double eta_min = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 1;
  std::size_t checkpoint_every = 0;  // epochs; 0 keeps only the final one
  double clip_norm = 0.0;            // global L2 gradient clip; 0 disables
  bool augment = true;
  double loss_eps = 1.0;
  std::size_t eval_every = 1;        // epochs between held-out evaluations; 0 disables
  double threshold = 0.5;
  double match_radius = 3.0;

  void validate() const;
};

// lr = eta_min + (lr0 - eta_min) * (1 + cos(pi t / T)) / 2 for 0 <= t <= T.
// Past T the rate stays at eta_min and a warning is printed once.
double cosine_lr(std::size_t t, std::size_t total, double lr0, double eta_min);

// Adam over the trainable entries of a registry. Moments are kept per entry
// in registry order.
template <typename T>
class Adam {
 public:
  Adam(const ParamRegistry<T>& params, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8);

  // Applies one update from the current gradients. Throws NumericalError
  // naming the parameter, before touching anything, if a gradient is not
  // finite. Parameters without a gradient are treated as having g = 0.
  void step(double lr);

  std::uint64_t steps() const { return t_; }
  const Tensor<T>& first_moment(std::size_t i) const { return m_.at(i); }
  const Tensor<T>& second_moment(std::size_t i) const { return v_.at(i); }

 private:
  std::vector<typename ParamRegistry<T>::Entry> params_;
  std::vector<Tensor<T>> m_, v_;
  double beta1_, beta2_, eps_;
  std::uint64_t t_ = 0;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double lr = 0;          // rate of the epoch's last step
  double loss = 0;        // mean batch loss
  std::optional<MetricReport> eval;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  std::uint64_t steps = 0;
};

struct TrainHooks {
  // When set, checkpoints go to DIR/epoch_<n>.ckpt at the configured cadence.
  std::filesystem::path checkpoint_dir;
  std::function<void(const EpochRecord&)> on_epoch;
};

// epoch,lr,loss,iou,niou,pd,fa
std::string history_csv(const std::vector<EpochRecord>& history);

// Seeded shuffle, augmentation, Soft-IoU, Adam with a per-step cosine
// schedule. `held_out` may be empty.
TrainResult train(SANet<float>& net, const Dataset& train_set, const Dataset& held_out,
                  const TrainConfig& config, const TrainHooks& hooks = {});

// Inference-mode forward in batches, then metric aggregation in dataset
// order.
MetricAccumulator evaluate(const SANet<float>& net, const Dataset& data, double threshold = 0.5,
                           double match_radius = 3.0, std::size_t batch = 8);

// Probability map [N, 1, H, W] for a batch of images.
Tensor<float> predict(const SANet<float>& net, const Tensor<float>& images);

}  // namespace sanet
