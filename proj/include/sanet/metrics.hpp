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
#include <optional>
#include <string>
#include <vector>

#include "sanet/tensor.hpp"

namespace sanet {

// Binary image, shape [H, W], values 0 or 1.
using Mask = Tensor<std::uint8_t>;

// mask = pred >= threshold, elementwise; shape is kept.
template <typename T>
Mask binarize(const Tensor<T>& pred, double threshold = 0.5);

// Image n, channel 0 of an NCHW tensor as an [H, W] tensor.
template <typename T>
Tensor<T> plane(const Tensor<T>& nchw, std::size_t n);

struct Component {
  std::size_t pixels = 0;
  // Coordinate sums; the centroid is sum / pixels. Kept as integers so that
  // distances can be formed exactly.
  std::int64_t row_sum = 0;
  std::int64_t col_sum = 0;
  std::vector<std::size_t> pixel_list;  // flat row-major indices

  double centroid_row() const { return static_cast<double>(row_sum) / static_cast<double>(pixels); }
  double centroid_col() const { return static_cast<double>(col_sum) / static_cast<double>(pixels); }
};

struct ComponentSet {
  Tensor<std::int32_t> labels;  // 0 background, 1..K
  std::vector<Component> components;  // components[k - 1] has label k

  std::size_t count() const { return components.size(); }
};

// 8-connected labelling. Labels follow the first pixel of each component in
// a row-major scan.
ComponentSet connected_components(const Mask& mask);

struct Match {
  std::size_t pred_label;
  std::size_t gt_label;
  double distance;
};

struct PdFa {
  std::optional<double> pd;  // empty when there is no ground-truth target
  double fa = 0;
  std::vector<Match> matching;
  std::size_t gt_targets = 0;
  std::size_t pred_targets = 0;
  std::size_t false_pixels = 0;
  std::size_t nontarget_pixels = 0;
};

// Greedy nearest-centroid matching. Candidate pairs within `radius` are taken
// in increasing distance, skipping either side once used. False pixels are
// the non-target pixels of unmatched predicted components.
//
// Equal distances go to the GT component first in scan order, then the
// predicted one. The mask form scans the flip of the pair (none, horizontal,
// vertical or both) whose pixel sequence compares largest, so mirrored inputs
// break ties the same way. The component form scans in label order.
PdFa pd_fa(const Mask& pred, const Mask& gt, double radius = 3.0);
PdFa pd_fa(const ComponentSet& pred, const ComponentSet& gt, double radius);

// |P & G| / |P | G|; 1 when both are empty.
double pixel_iou(const Mask& pred, const Mask& gt);

// Mean over ground-truth components k of TPk / (Tk + Pk - TPk), where Pk is
// the predicted component matched to k (none: the term is 0). With no
// ground-truth component the value is 1 for an empty prediction, else 0.
double niou(const Mask& pred, const Mask& gt, double radius = 3.0);

struct MetricReport {
  std::string id;
  double threshold = 0.5;
  double match_radius = 3.0;
  double iou = 0;
  double niou = 0;
  std::optional<double> pd;
  double fa = 0;
  std::size_t images = 0;
  std::size_t gt_targets = 0;
  std::size_t pred_targets = 0;
  std::size_t tp_targets = 0;
  std::size_t fp_targets = 0;
  std::size_t fn_targets = 0;
  std::size_t intersection_pixels = 0;
  std::size_t union_pixels = 0;
  std::size_t pred_pixels = 0;
  std::size_t gt_pixels = 0;
  std::size_t false_pixels = 0;
  std::size_t nontarget_pixels = 0;
  std::vector<std::string> warnings;

  double fa_per_million() const { return fa * 1e6; }
  std::string to_json() const;  // single object
  static std::string csv_header();
  std::string csv_row() const;
};

// Folds per-image results in insertion order. Dataset IoU uses global pixel
// tallies; nIoU averages over every ground-truth target in the set.
class MetricAccumulator {
 public:
  explicit MetricAccumulator(double threshold = 0.5, double match_radius = 3.0)
      : threshold_(threshold), radius_(match_radius) {}

  // Binary masks of one image; returns that image's report.
  const MetricReport& add(const Mask& pred, const Mask& gt, std::string id = {});
  // Probability maps [N,1,H,W] against binary targets of the same shape.
  template <typename T>
  void add_batch(const Tensor<T>& prob, const Tensor<T>& target,
                 const std::vector<std::string>& ids = {});

  const std::vector<MetricReport>& per_image() const { return images_; }
  MetricReport aggregate() const;

  // Per-image rows followed by an "all" row.
  std::string to_csv() const;
  // {"aggregate": {...}, "images": [...]}
  std::string to_json() const;

 private:
  double threshold_;
  double radius_;
  std::vector<MetricReport> images_;
  double niou_sum_ = 0;
};

}  // namespace sanet
