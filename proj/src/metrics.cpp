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

#include "sanet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace sanet {

namespace {

void require_plane(const Mask& m, const char* what) {
  if (m.rank() != 2) {
    throw ShapeError(std::string(what) + " must be an [H,W] mask, got " + shape_str(m.shape()));
  }
}

void require_pair(const Mask& pred, const Mask& gt) {
  require_plane(pred, "prediction");
  require_plane(gt, "ground truth");
  if (pred.shape() != gt.shape()) {
    throw ShapeError("prediction " + shape_str(pred.shape()) + " and ground truth " +
                     shape_str(gt.shape()) + " differ");
  }
}

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

// Terms of the nIoU mean for one image: sum over GT components and their
// number.
struct NiouTerms {
  double sum = 0;
  std::size_t count = 0;
};

NiouTerms niou_terms(const ComponentSet& pred, const ComponentSet& gt, const PdFa& m,
                     const std::vector<std::size_t>& gt_rank) {
  NiouTerms t;
  t.count = gt.count();
  // Summed in rank order so that the total does not depend on labelling.
  std::vector<Match> order = m.matching;
  std::sort(order.begin(), order.end(), [&](const Match& a, const Match& b) {
    return gt_rank[a.gt_label - 1] < gt_rank[b.gt_label - 1];
  });
  for (const Match& match : order) {
    const Component& g = gt.components[match.gt_label - 1];
    const Component& p = pred.components[match.pred_label - 1];
    std::size_t tp = 0;
    for (std::size_t idx : p.pixel_list) {
      if (gt.labels[idx] == static_cast<std::int32_t>(match.gt_label)) ++tp;
    }
    t.sum += static_cast<double>(tp) / static_cast<double>(g.pixels + p.pixels - tp);
  }
  return t;
}

std::vector<std::size_t> label_rank(const ComponentSet& cs) {
  std::vector<std::size_t> r(cs.count());
  std::iota(r.begin(), r.end(), std::size_t{0});
  return r;
}

// Of the four images reachable by horizontal and vertical flips, pick the
// one whose (pred, gt) pixel sequence is lexicographically largest and rank
// components by their first pixel in that image. Every flip of the input
// picks the same image, so ties broken by these ranks resolve identically.
struct Ranks {
  std::vector<std::size_t> pred, gt;
};

Ranks canonical_ranks(const Mask& pred, const Mask& gt, const ComponentSet& pc, const ComponentSet& gc) {
  const std::size_t h = pred.dim(0), w = pred.dim(1);
  auto map = [&](int o, std::size_t idx) {
    std::size_t i = idx / w, j = idx % w;
    if (o & 1) j = w - 1 - j;
    if (o & 2) i = h - 1 - i;
    return i * w + j;
  };
  // Position k of flipped image o reads source pixel map(o, k): flips are
  // involutions.
  auto greater = [&](int a, int b) {
    for (const Mask* m : {&pred, &gt}) {
      for (std::size_t k = 0; k < h * w; ++k) {
        const auto va = (*m)[map(a, k)], vb = (*m)[map(b, k)];
        if (va != vb) return va > vb;
      }
    }
    return false;
  };
  int best = 0;
  for (int o = 1; o < 4; ++o) {
    if (greater(o, best)) best = o;
  }
  auto rank = [&](const ComponentSet& cs) {
    std::vector<std::size_t> r;
    for (const Component& c : cs.components) {
      std::size_t first = h * w;
      for (std::size_t idx : c.pixel_list) first = std::min(first, map(best, idx));
      r.push_back(first);
    }
    return r;
  };
  return {rank(pc), rank(gc)};
}

PdFa match_components(const ComponentSet& pred, const ComponentSet& gt, double radius,
                      const std::vector<std::size_t>& pred_rank, const std::vector<std::size_t>& gt_rank);

nlohmann::json optional_ratio(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json report_json(const MetricReport& r) {
  return {{"id", r.id},
          {"threshold", r.threshold},
          {"match_radius", r.match_radius},
          {"iou", r.iou},
          {"niou", r.niou},
          {"pd", optional_ratio(r.pd)},
          {"fa", r.fa},
          {"fa_per_million", r.fa_per_million()},
          {"images", r.images},
          {"gt_targets", r.gt_targets},
          {"pred_targets", r.pred_targets},
          {"tp_targets", r.tp_targets},
          {"fp_targets", r.fp_targets},
          {"fn_targets", r.fn_targets},
          {"intersection_pixels", r.intersection_pixels},
          {"union_pixels", r.union_pixels},
          {"pred_pixels", r.pred_pixels},
          {"gt_pixels", r.gt_pixels},
          {"false_pixels", r.false_pixels},
          {"nontarget_pixels", r.nontarget_pixels},
          {"iou_pooling", "global pixel tallies"},
          {"warnings", r.warnings}};
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

}  // namespace

template <typename T>
Mask binarize(const Tensor<T>& pred, double threshold) {
  Mask out(pred.shape());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    out[i] = static_cast<double>(pred[i]) >= threshold ? 1 : 0;
  }
  return out;
}

template <typename T>
Tensor<T> plane(const Tensor<T>& nchw, std::size_t n) {
  require_nchw(nchw, "batch");
  const std::size_t h = nchw.dim(2), w = nchw.dim(3);
  if (n >= nchw.dim(0)) throw std::out_of_range("image index " + std::to_string(n));
  Tensor<T> out({h, w});
  const T* src = nchw.data() + n * nchw.dim(1) * h * w;
  std::copy(src, src + h * w, out.data());
  return out;
}

ComponentSet connected_components(const Mask& mask) {
  require_plane(mask, "mask");
  const std::size_t h = mask.dim(0), w = mask.dim(1);
  // Two-pass union-find over pixel indices.
  std::vector<std::size_t> parent(h * w);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      const std::size_t idx = i * w + j;
      if (!mask[idx]) continue;
      auto join = [&](std::size_t other) {
        if (!mask[other]) return;
        const std::size_t a = find_root(parent, idx), b = find_root(parent, other);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      };
      if (j > 0) join(idx - 1);
      if (i > 0) {
        join(idx - w);
        if (j > 0) join(idx - w - 1);
        if (j + 1 < w) join(idx - w + 1);
      }
    }
  }

  ComponentSet out;
  out.labels = Tensor<std::int32_t>({h, w});
  std::vector<std::int32_t> root_label(h * w, 0);
  for (std::size_t idx = 0; idx < h * w; ++idx) {
    if (!mask[idx]) continue;
    const std::size_t r = find_root(parent, idx);
    if (root_label[r] == 0) {
      out.components.emplace_back();
      root_label[r] = static_cast<std::int32_t>(out.components.size());
    }
    const std::int32_t label = root_label[r];
    out.labels[idx] = label;
    Component& c = out.components[static_cast<std::size_t>(label) - 1];
    ++c.pixels;
    c.row_sum += static_cast<std::int64_t>(idx / w);
    c.col_sum += static_cast<std::int64_t>(idx % w);
    c.pixel_list.push_back(idx);
  }
  return out;
}


PdFa pd_fa(const ComponentSet& pred, const ComponentSet& gt, double radius) {
  return match_components(pred, gt, radius, label_rank(pred), label_rank(gt));
}

namespace {

PdFa match_components(const ComponentSet& pred, const ComponentSet& gt, double radius,
                      const std::vector<std::size_t>& pred_rank, const std::vector<std::size_t>& gt_rank) {
  if (pred.labels.shape() != gt.labels.shape()) {
    throw ShapeError("prediction " + shape_str(pred.labels.shape()) + " and ground truth " +
                     shape_str(gt.labels.shape()) + " differ");
  }
  PdFa r;
  r.gt_targets = gt.count();
  r.pred_targets = pred.count();

  // Squared centroid distance as an exact ratio of integers: for centroids
  // a = A/na and b = B/nb, (a - b)^2 = (A*nb - B*na)^2 / (na*nb)^2. The
  // numerator only changes sign under a flip, so the double formed from it
  // is the same for a mirrored image.
  struct Pair {
    double d2;
    std::size_t gt, pred;
  };
  std::vector<Pair> pairs;
  for (std::size_t p = 0; p < pred.count(); ++p) {
    const Component& cp = pred.components[p];
    for (std::size_t g = 0; g < gt.count(); ++g) {
      const Component& cg = gt.components[g];
      const auto np = static_cast<__int128>(cp.pixels), ng = static_cast<__int128>(cg.pixels);
      const __int128 dr = cp.row_sum * ng - cg.row_sum * np;
      const __int128 dc = cp.col_sum * ng - cg.col_sum * np;
      const __int128 den = np * ng;
      const long double d2 = static_cast<long double>(dr * dr + dc * dc) /
                             (static_cast<long double>(den) * static_cast<long double>(den));
      if (d2 <= static_cast<long double>(radius) * radius) {
        pairs.push_back({static_cast<double>(d2), g + 1, p + 1});
      }
    }
  }
  std::sort(pairs.begin(), pairs.end(), [&](const Pair& a, const Pair& b) {
    if (a.d2 != b.d2) return a.d2 < b.d2;
    if (a.gt != b.gt) return gt_rank[a.gt - 1] < gt_rank[b.gt - 1];
    return pred_rank[a.pred - 1] < pred_rank[b.pred - 1];
  });
  std::vector<bool> gt_used(gt.count() + 1, false), pred_used(pred.count() + 1, false);
  for (const Pair& pr : pairs) {
    if (gt_used[pr.gt] || pred_used[pr.pred]) continue;
    gt_used[pr.gt] = pred_used[pr.pred] = true;
    r.matching.push_back({pr.pred, pr.gt, std::sqrt(pr.d2)});
  }

  // Pixels of an unmatched component that lie on a target are not counted:
  // the rate is over non-target pixels.
  for (std::size_t p = 1; p <= pred.count(); ++p) {
    if (pred_used[p]) continue;
    for (std::size_t idx : pred.components[p - 1].pixel_list) r.false_pixels += gt.labels[idx] == 0;
  }
  std::size_t gt_pixels = 0;
  for (const Component& c : gt.components) gt_pixels += c.pixels;
  r.nontarget_pixels = gt.labels.size() - gt_pixels;
  r.fa = r.nontarget_pixels ? static_cast<double>(r.false_pixels) /
                                  static_cast<double>(r.nontarget_pixels)
                            : 0.0;
  if (gt.count() > 0) {
    r.pd = static_cast<double>(r.matching.size()) / static_cast<double>(gt.count());
  }
  return r;
}

// Matching and nIoU terms of one mask pair with orientation-free tie-breaks.
struct ImageMatch {
  ComponentSet pc, gc;
  Ranks ranks;
  PdFa m;
  NiouTerms t;
};

ImageMatch match_masks(const Mask& pred, const Mask& gt, double radius) {
  require_pair(pred, gt);
  ImageMatch im;
  im.pc = connected_components(pred);
  im.gc = connected_components(gt);
  im.ranks = canonical_ranks(pred, gt, im.pc, im.gc);
  im.m = match_components(im.pc, im.gc, radius, im.ranks.pred, im.ranks.gt);
  im.t = niou_terms(im.pc, im.gc, im.m, im.ranks.gt);
  return im;
}

}  // namespace

PdFa pd_fa(const Mask& pred, const Mask& gt, double radius) { return match_masks(pred, gt, radius).m; }

double pixel_iou(const Mask& pred, const Mask& gt) {
  require_pair(pred, gt);
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    inter += pred[i] && gt[i];
    uni += pred[i] || gt[i];
  }
  return uni ? static_cast<double>(inter) / static_cast<double>(uni) : 1.0;
}

double niou(const Mask& pred, const Mask& gt, double radius) {
  const ImageMatch im = match_masks(pred, gt, radius);
  if (im.t.count == 0) return im.pc.count() == 0 ? 1.0 : 0.0;
  return im.t.sum / static_cast<double>(im.t.count);
}

const MetricReport& MetricAccumulator::add(const Mask& pred, const Mask& gt, std::string id) {
  const ImageMatch im = match_masks(pred, gt, radius_);
  const PdFa& m = im.m;
  const NiouTerms& t = im.t;

  MetricReport r;
  r.id = id.empty() ? std::to_string(images_.size()) : std::move(id);
  r.threshold = threshold_;
  r.match_radius = radius_;
  r.images = 1;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    r.intersection_pixels += pred[i] && gt[i];
    r.union_pixels += pred[i] || gt[i];
    r.pred_pixels += pred[i] != 0;
    r.gt_pixels += gt[i] != 0;
  }
  r.iou = r.union_pixels ? static_cast<double>(r.intersection_pixels) /
                               static_cast<double>(r.union_pixels)
                         : 1.0;
  r.niou = t.count ? t.sum / static_cast<double>(t.count) : (im.pc.count() == 0 ? 1.0 : 0.0);
  r.pd = m.pd;
  if (!r.pd) r.warnings.push_back("no ground-truth target; Pd undefined");
  r.fa = m.fa;
  r.gt_targets = m.gt_targets;
  r.pred_targets = m.pred_targets;
  r.tp_targets = m.matching.size();
  r.fp_targets = m.pred_targets - m.matching.size();
  r.fn_targets = m.gt_targets - m.matching.size();
  r.false_pixels = m.false_pixels;
  r.nontarget_pixels = m.nontarget_pixels;
  niou_sum_ += t.sum;
  images_.push_back(std::move(r));
  return images_.back();
}

template <typename T>
void MetricAccumulator::add_batch(const Tensor<T>& prob, const Tensor<T>& target,
                                  const std::vector<std::string>& ids) {
  require_nchw(prob, "prediction");
  if (prob.shape() != target.shape()) {
    throw ShapeError("prediction " + shape_str(prob.shape()) + " and target " +
                     shape_str(target.shape()) + " differ");
  }
  for (std::size_t n = 0; n < prob.dim(0); ++n) {
    add(binarize(plane(prob, n), threshold_), binarize(plane(target, n), 0.5),
        n < ids.size() ? ids[n] : std::string{});
  }
}

MetricReport MetricAccumulator::aggregate() const {
  MetricReport a;
  a.id = "all";
  a.threshold = threshold_;
  a.match_radius = radius_;
  a.images = images_.size();
  for (const MetricReport& r : images_) {
    a.gt_targets += r.gt_targets;
    a.pred_targets += r.pred_targets;
    a.tp_targets += r.tp_targets;
    a.fp_targets += r.fp_targets;
    a.fn_targets += r.fn_targets;
    a.intersection_pixels += r.intersection_pixels;
    a.union_pixels += r.union_pixels;
    a.pred_pixels += r.pred_pixels;
    a.gt_pixels += r.gt_pixels;
    a.false_pixels += r.false_pixels;
    a.nontarget_pixels += r.nontarget_pixels;
  }
  a.iou = a.union_pixels ? static_cast<double>(a.intersection_pixels) /
                               static_cast<double>(a.union_pixels)
                         : 1.0;
  if (a.gt_targets) {
    a.niou = niou_sum_ / static_cast<double>(a.gt_targets);
    a.pd = static_cast<double>(a.tp_targets) / static_cast<double>(a.gt_targets);
  } else {
    a.niou = a.pred_targets == 0 ? 1.0 : 0.0;
    a.warnings.push_back("no ground-truth target; Pd undefined");
  }
  a.fa = a.nontarget_pixels ? static_cast<double>(a.false_pixels) /
                                  static_cast<double>(a.nontarget_pixels)
                            : 0.0;
  return a;
}

std::string MetricReport::to_json() const { return report_json(*this).dump(2); }

std::string MetricReport::csv_header() {
  return "id,threshold,match_radius,iou,niou,pd,fa,fa_per_million,gt_targets,pred_targets,"
         "tp_targets,fp_targets,fn_targets,intersection_pixels,union_pixels,false_pixels,"
         "nontarget_pixels";
}

std::string MetricReport::csv_row() const {
  std::ostringstream os;
  os << id << ',' << fmt(threshold) << ',' << fmt(match_radius) << ',' << fmt(iou) << ','
     << fmt(niou) << ',' << (pd ? fmt(*pd) : "NA") << ',' << fmt(fa) << ','
     << fmt(fa_per_million()) << ',' << gt_targets << ',' << pred_targets << ',' << tp_targets
     << ',' << fp_targets << ',' << fn_targets << ',' << intersection_pixels << ','
     << union_pixels << ',' << false_pixels << ',' << nontarget_pixels;
  return os.str();
}

std::string MetricAccumulator::to_csv() const {
  std::string out = MetricReport::csv_header() + "\n";
  for (const MetricReport& r : images_) out += r.csv_row() + "\n";
  out += aggregate().csv_row() + "\n";
  return out;
}

std::string MetricAccumulator::to_json() const {
  nlohmann::json j;
  j["aggregate"] = report_json(aggregate());
  j["images"] = nlohmann::json::array();
  for (const MetricReport& r : images_) j["images"].push_back(report_json(r));
  return j.dump(2);
}

template Mask binarize(const Tensor<float>&, double);
template Mask binarize(const Tensor<double>&, double);
template Tensor<float> plane(const Tensor<float>&, std::size_t);
template Tensor<double> plane(const Tensor<double>&, std::size_t);
template void MetricAccumulator::add_batch(const Tensor<float>&, const Tensor<float>&,
                                           const std::vector<std::string>&);
template void MetricAccumulator::add_batch(const Tensor<double>&, const Tensor<double>&,
                                           const std::vector<std::string>&);

}  // namespace sanet
