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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.
//
//   acceptance [--only 1,5,7] [--work DIR]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../oracles.hpp"
#include "sanet/ablation.hpp"
#include "sanet/check_suite.hpp"
#include "sanet/dsm.hpp"
#include "sanet/metrics.hpp"
#include "sanet/network.hpp"
#include "sanet/ops.hpp"
#include "sanet/pipeline.hpp"
#include "sanet/safm.hpp"
#include "sanet/trainer.hpp"

using namespace sanet;
namespace fs = std::filesystem;
using VarD = Var<double>;
using TapeD = Tape<double>;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

VarD cst(Tensor<double> t) { return VarD::constant(std::move(t)); }

double max_abs_diff(const Tensor<double>& a, const Tensor<double>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// ---------------------------------------------------------------- 1

Outcome conv_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<std::size_t> d(1, 8), p(0, 4), s(1, 2), pick(0, 5);
  double worst = 0;
  std::size_t shapes = 0, strip = 0;
  while (shapes < 150) {
    const std::size_t n = d(rng) % 3 + 1, cin = d(rng), cout = d(rng), h = d(rng), w = d(rng);
    std::size_t kh = d(rng), kw = d(rng);
    Padding pad{p(rng), p(rng), p(rng), p(rng)};
    std::size_t stride = s(rng);
    // Every third shape uses a strip kernel padded on one side only, as the
    // four directional branches do.
    if (shapes % 3 == 0) {
      const std::size_t k = pick(rng) % 2 ? 3 : 5;
      stride = 1;
      switch (pick(rng) % 4) {
        case 0: kh = 1, kw = k, pad = {0, 0, k - 1, 0}; break;
        case 1: kh = 1, kw = k, pad = {0, 0, 0, k - 1}; break;
        case 2: kh = k, kw = 1, pad = {k - 1, 0, 0, 0}; break;
        default: kh = k, kw = 1, pad = {0, k - 1, 0, 0}; break;
      }
      ++strip;
    }
    if (h + pad.top + pad.bottom < kh || w + pad.left + pad.right < kw) continue;
    const auto x = oracle::random_tensor({n, cin, h, w}, rng);
    const auto k = oracle::random_tensor({cout, cin, kh, kw}, rng);
    const auto b = oracle::random_tensor({cout}, rng);
    TapeD tape;
    const auto y = conv2d(tape, cst(x), cst(k), cst(b), {stride, pad});
    const auto ref = oracle::conv2d(x, k, &b, stride, pad);
    if (y.shape() != ref.shape()) return {false, "shape mismatch"};
    worst = std::max(worst, max_abs_diff(y.value(), ref));
    ++shapes;
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-12 && t < 10.0,
          fmt("%zu shapes (%zu one-sided strips), max |diff| %.2e, %.2f s", shapes, strip, worst, t)};
}

// ---------------------------------------------------------------- 2

Outcome gradient_suite() {
  const auto t0 = Clock::now();
  const auto entries = run_gradcheck_suite(1);
  const double t = seconds_since(t0);
  const std::vector<std::string> needed = {"conv2d", "max_pool2d", "transposed_conv2d", "channel mean",
                                           "global max pool", "sigmoid", "relu", "pinwheel",
                                           "channel attention", "spatial attention", "safm (with lambda)",
                                           "soft-IoU loss", "network end-to-end eval",
                                           "network end-to-end train"};
  for (const auto& n : needed) {
    bool found = false;
    for (const auto& e : entries) found = found || e.component.rfind(n, 0) == 0;
    if (!found) return {false, "suite lacks " + n};
  }
  double worst = 0;
  std::string worst_name, failed;
  for (const auto& e : entries) {
    if (!e.report.passed && failed.empty()) failed = e.component;
    if (e.report.worst_rel_error >= worst) worst = e.report.worst_rel_error, worst_name = e.component;
  }
  if (!failed.empty()) return {false, "failed: " + failed};
  return {t < 120.0, fmt("%zu checks at rtol 1e-4, worst %.2e (%s), %.1f s", entries.size(), worst,
                         worst_name.c_str(), t)};
}

// ---------------------------------------------------------------- 3

Tensor<double> concat_ref(const Tensor<double>& e, const Tensor<double>& d) {
  const std::size_t n = e.dim(0), c = e.dim(1), h = e.dim(2), w = e.dim(3);
  Tensor<double> x({n, 2 * c, h, w});
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < w; ++j) {
          x.at(b, ch, i, j) = e.at(b, ch, i, j);
          x.at(b, c + ch, i, j) = d.at(b, ch, i, j);
        }
  return x;
}

Outcome safm_identities() {
  std::mt19937_64 rng(303);
  Initializer init(7);
  auto p = Safm<double>::make(init, 4, {});
  if (p.lambda.value()[0] != 0.0) return {false, "lambda does not start at 0"};
  std::uniform_int_distribution<std::size_t> ext(7, 12);
  std::size_t identity = 0, symmetric = 0, monotone = 0;
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t h = ext(rng), w = ext(rng);
    const auto e = oracle::random_tensor({2, 4, h, w}, rng, -5, 5);
    const auto d = oracle::random_tensor({2, 4, h, w}, rng, -5, 5);
    p.conv7.weight.mutable_value() = oracle::random_tensor(p.conv7.weight.shape(), rng);
    p.conv1.bias.mutable_value() = oracle::random_tensor(p.conv1.bias.shape(), rng);
    TapeD tape;
    identity += safm_forward(tape, cst(e), cst(d), p).value() == concat_ref(e, d);
  }
  {
    auto q = Safm<double>::make(init, 2, {});
    q.conv7.weight.mutable_value().fill(0.0);
    q.conv7.bias.mutable_value().fill(0.5);
    for (int rep = 0; rep < 50; ++rep) {
      const auto e = oracle::random_tensor({2, 2, 7, 7}, rng, -3, 3);
      const auto d = oracle::random_tensor({2, 2, 7, 7}, rng, -3, 3);
      TapeD tape;
      const auto t = safm_trace(tape, cst(e), cst(d), q);
      bool ok = true;
      for (double s : t.saf.value().values()) ok = ok && s == 0.5;
      symmetric += ok && t.e_weight.value() == t.d_weight.value();
    }
  }
  {
    auto q = Safm<double>::make(init, 3, {});
    std::uniform_real_distribution<double> step(0.01, 2.0);
    for (int rep = 0; rep < 50; ++rep) {
      const auto e = oracle::random_tensor({2, 3, 8, 7}, rng);
      const auto d = oracle::random_tensor({2, 3, 8, 7}, rng);
      q.conv7.bias.mutable_value() = oracle::random_tensor({1}, rng);
      TapeD tape;
      const auto lo = safm_trace(tape, cst(e), cst(d), q);
      q.conv7.bias.mutable_value()[0] += step(rng);
      const auto hi = safm_trace(tape, cst(e), cst(d), q);
      bool ok = true;
      for (std::size_t i = 0; i < lo.saf.size(); ++i) {
        ok = ok && hi.saf.value()[i] > lo.saf.value()[i] && hi.e_weight.value()[i] > lo.e_weight.value()[i] &&
             hi.d_weight.value()[i] < lo.d_weight.value()[i];
      }
      monotone += ok;
    }
  }
  return {identity == 60 && symmetric == 50 && monotone == 50,
          fmt("lambda=0 concat %zu/60 bit-exact, equal weights at 0.5 %zu/50, monotone %zu/50", identity,
              symmetric, monotone)};
}

// ---------------------------------------------------------------- 4

Tensor<double> concat_unet(const SANet<double>& net, const Tensor<double>& x) {
  TapeD tape;
  std::vector<VarD> skips;
  VarD h = cst(x);
  for (std::size_t i = 0; i < net.encoder().size(); ++i) {
    if (i > 0) h = max_pool2d(tape, h);
    h = dsm_forward(tape, h, net.encoder()[i], false);
    skips.push_back(h);
  }
  for (std::size_t i = net.upsamplers().size(); i-- > 0;) {
    const auto& up = net.upsamplers()[i];
    VarD d = transposed_conv2d(tape, h, up.weight, up.bias);
    h = net.decoder_convs()[i](tape, concat_channels(tape, skips[i], d), false);
  }
  return sigmoid(tape, net.head()(tape, h)).value();
}

Outcome architecture_identity() {
  std::size_t same = 0, total = 0;
  for (std::size_t stages : {3u, 4u}) {
    SANetConfig cfg;
    cfg.base_channels = 8;
    cfg.stages = stages;
    SANet<double> net(cfg, 404 + stages);
    std::mt19937_64 rng(stages);
    const std::size_t side = 7 << (stages - 1);
    for (int rep = 0; rep < 3; ++rep) {
      const auto x = oracle::random_tensor({2, 1, side, side}, rng, 0.0, 1.0);
      TapeD tape;
      same += net.forward(tape, cst(x), false).value() == concat_unet(net, x);
      ++total;
    }
  }
  return {same == total, fmt("%zu/%zu forwards bit-identical to the concatenation U-Net", same, total)};
}

// ---------------------------------------------------------------- 5

Mask points(std::size_t h, std::size_t w, const std::vector<std::pair<std::size_t, std::size_t>>& px) {
  Mask m({h, w});
  for (auto [r, c] : px) m[r * w + c] = 1;
  return m;
}

std::vector<int> flood_fill(const Mask& m) {
  const long h = static_cast<long>(m.dim(0)), w = static_cast<long>(m.dim(1));
  std::vector<int> label(m.size(), 0);
  int next = 0;
  for (long i = 0; i < h * w; ++i) {
    if (!m[i] || label[i]) continue;
    label[i] = ++next;
    std::vector<long> stack{i};
    while (!stack.empty()) {
      const long at = stack.back();
      stack.pop_back();
      for (long dr = -1; dr <= 1; ++dr)
        for (long dc = -1; dc <= 1; ++dc) {
          const long r = at / w + dr, c = at % w + dc;
          if (r < 0 || c < 0 || r >= h || c >= w || !m[r * w + c] || label[r * w + c]) continue;
          label[r * w + c] = next;
          stack.push_back(r * w + c);
        }
    }
  }
  return label;
}

Mask flipped(const Mask& m, bool vertical) {
  const std::size_t h = m.dim(0), w = m.dim(1);
  Mask out({h, w});
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < w; ++j) out[vertical ? (h - 1 - i) * w + j : i * w + (w - 1 - j)] = m[i * w + j];
  return out;
}

Outcome metric_oracles() {
  struct Case {
    Mask pred, gt;
    double iou, niou;
    std::optional<double> pd;
    double fa;
  };
  const Mask plus_a = points(64, 64, {{9, 10}, {10, 9}, {10, 10}, {10, 11}, {11, 10}});
  const Mask plus_b = points(64, 64, {{10, 10}, {11, 9}, {11, 10}, {11, 11}, {12, 10}});
  const Mask ring = points(64, 64, {{9, 10}, {11, 10}, {10, 9}, {10, 11}});
  const Mask far_plus = points(64, 64, {{19, 20}, {20, 19}, {20, 20}, {20, 21}, {21, 20}});
  const std::vector<Case> cases{
      {plus_b, plus_a, 0.25, 0.25, 1.0, 0.0},
      {far_plus, ring, 0.0, 0.0, 0.0, 5.0 / 4092.0},
      {points(8, 8, {{2, 2}, {2, 3}}), points(8, 8, {{2, 2}, {2, 3}}), 1.0, 1.0, 1.0, 0.0},
      {points(8, 8, {{1, 1}}), points(8, 8, {{1, 1}, {1, 2}}), 0.5, 0.5, 1.0, 0.0},
      {points(10, 10, {{8, 8}, {8, 9}}), points(10, 10, {{1, 1}}), 0.0, 0.0, 0.0, 2.0 / 99.0},
      {points(10, 10, {{1, 3}}), points(10, 10, {{1, 1}}), 0.0, 0.0, 1.0, 0.0},
      {Mask({8, 8}), points(8, 8, {{2, 2}}), 0.0, 0.0, 0.0, 0.0},
      {Mask({8, 8}), Mask({8, 8}), 1.0, 1.0, std::nullopt, 0.0},
      {points(8, 8, {{0, 0}, {0, 1}, {5, 5}}), Mask({8, 8}), 0.0, 0.0, std::nullopt, 3.0 / 64.0},
      {points(10, 10, {{2, 4}}), points(10, 10, {{2, 2}, {2, 6}}), 0.0, 0.0, 0.5, 0.0},
      {points(10, 10, {{5, 2}, {5, 7}}), points(10, 10, {{5, 5}}), 0.0, 0.0, 1.0, 1.0 / 99.0},
      {points(10, 10, {{1, 1}, {1, 2}, {2, 3}}), points(10, 10, {{1, 1}, {1, 2}, {6, 6}}), 0.5, 1.0 / 3.0, 0.5,
       0.0},
      {points(10, 10, {{4, 1}}), points(10, 10, {{1, 1}}), 0.0, 0.0, 1.0, 0.0},
  };
  std::size_t ok_cases = 0;
  auto close = [](double a, double b) { return std::abs(a - b) <= 1e-12; };
  for (const auto& c : cases) {
    const PdFa r = pd_fa(c.pred, c.gt);
    const bool pd_ok = r.pd.has_value() == c.pd.has_value() && (!r.pd || close(*r.pd, *c.pd));
    ok_cases += close(pixel_iou(c.pred, c.gt), c.iou) && close(niou(c.pred, c.gt), c.niou) && pd_ok &&
                close(r.fa, c.fa);
  }

  std::size_t cc_ok = 0;
  for (std::uint64_t seed = 0; seed < 120; ++seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution on(0.05 + 0.6 * static_cast<double>(seed % 12) / 11.0);
    Mask m({32, 32});
    for (auto& v : m.values()) v = on(rng);
    const ComponentSet cs = connected_components(m);
    const auto want = flood_fill(m);
    bool same = true;
    for (std::size_t i = 0; i < m.size(); ++i) same = same && cs.labels[i] == want[i];
    cc_ok += same;
  }

  std::size_t flip_ok = 0, flip_total = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    std::mt19937_64 rng(seed + 5000);
    std::bernoulli_distribution on(0.04);
    Mask p({24, 24}), g({24, 24});
    for (auto& v : p.values()) v = on(rng);
    for (auto& v : g.values()) v = on(rng);
    const PdFa base = pd_fa(p, g);
    for (bool vertical : {false, true}) {
      const Mask pf = flipped(p, vertical), gf = flipped(g, vertical);
      const PdFa f = pd_fa(pf, gf);
      flip_ok += pixel_iou(pf, gf) == pixel_iou(p, g) && niou(pf, gf) == niou(p, g) && f.pd == base.pd &&
                 f.fa == base.fa;
      ++flip_total;
    }
  }
  return {ok_cases == cases.size() && cc_ok == 120 && flip_ok == flip_total,
          fmt("constructed pairs %zu/%zu, flood fill %zu/120, flips %zu/%zu", ok_cases, cases.size(), cc_ok,
              flip_ok, flip_total)};
}

// ---------------------------------------------------------------- 6

Outcome optimizer_oracle() {
  ParamRegistry<double> reg;
  reg.add("theta", VarD::leaf(Tensor<double>::scalar(1.0), true), true);
  const VarD th = reg.find("theta")->var;
  Adam<double> adam(reg, 0.9, 0.999, 1e-8);
  double theta = 1.0, m = 0, v = 0, worst = 0;
  for (int t = 1; t <= 3; ++t) {
    reg.zero_grad();
    TapeD tape;
    auto f = sum(tape, mul(tape, th, th));
    tape.backward(f);
    adam.step(0.1);
    const double g = 2.0 * theta;
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    theta -= 0.1 * (m / (1 - std::pow(0.9, t))) / (std::sqrt(v / (1 - std::pow(0.999, t))) + 1e-8);
    worst = std::max(worst, std::abs(th.value()[0] - theta));
  }
  const TrainConfig defaults;
  const bool ends = cosine_lr(0, 500, defaults.lr0, 0.0) == 1e-3 && cosine_lr(500, 500, 1e-3, 0.0) == 0.0 &&
                    cosine_lr(500, 500, 1e-3, 2e-5) == 2e-5 && defaults.lr0 == 1e-3;
  return {worst <= 1e-12 && ends, fmt("3-step transcript max |diff| %.2e, schedule endpoints %s", worst,
                                      ends ? "exact" : "wrong")};
}

// ---------------------------------------------------------------- 7-10

RunConfig overfit_config() {
  RunConfig c;
  c.set("model.stages", "4");
  c.set("model.base_channels", "16");
  c.set("data.train_count", "4");
  c.set("data.test_count", "4");
  c.set("train.epochs", "200");
  c.set("train.batch", "4");
  c.set("train.eval_every", "0");
  return c;
}

RunConfig synthetic_config() {
  RunConfig c;
  c.set("model.stages", "4");
  c.set("model.base_channels", "16");
  c.set("data.train_count", "200");
  c.set("data.test_count", "50");
  c.set("train.epochs", "50");
  c.set("train.eval_every", "10");
  return c;
}

struct RunRecord {
  TrainRun run;
  double seconds = 0;
};

RunRecord train_into(const RunConfig& cfg, const fs::path& dir) {
  fs::remove_all(dir);
  Manifest m;
  m.command = "train";
  const auto t0 = Clock::now();
  RunRecord r{run_train(cfg, dir, m), 0};
  r.seconds = seconds_since(t0);
  m.write(dir, cfg);
  return r;
}

Outcome overfit(const fs::path& dir) {
  const RunRecord r = train_into(overfit_config(), dir);
  const double loss = r.run.result.history.back().loss;
  return {loss < 0.1 && r.seconds < 300.0,
          fmt("4 images, 200 epochs: final training loss %.4f, %.0f s", loss, r.seconds)};
}

Outcome synthetic_bar(const fs::path& dir) {
  const RunRecord r = train_into(synthetic_config(), dir);
  const MetricReport& m = r.run.test;
  const double pd = m.pd.value_or(0.0);
  return {m.iou >= 0.5 && pd >= 0.9 && m.fa <= 1e-2 && r.seconds < 1800.0,
          fmt("200/50 scenes, 50 epochs: IoU %.4f, nIoU %.4f, Pd %.4f, Fa %.2e, %.0f s", m.iou, m.niou, pd, m.fa,
              r.seconds)};
}

Outcome determinism(const fs::path& work, bool have7, bool have8) {
  std::string detail;
  bool pass = true;
  const std::pair<const char*, RunConfig> runs[] = {{"overfit", overfit_config()},
                                                    {"synthetic", synthetic_config()}};
  for (const auto& [name, cfg] : runs) {
    const fs::path first = work / name, second = work / (std::string(name) + "_repeat");
    if ((std::string(name) == "overfit" && !have7) || (std::string(name) == "synthetic" && !have8)) {
      train_into(cfg, first);
    }
    train_into(cfg, second);
    std::size_t same = 0;
    const char* files[] = {"history.csv", "metrics.json", "metrics.csv", "model.ckpt"};
    for (const char* f : files) same += slurp(first / f) == slurp(second / f) && !slurp(first / f).empty();
    pass = pass && same == 4;
    detail += fmt("%s%s %zu/4 files identical", detail.empty() ? "" : ", ", name, same);
  }
  return {pass, detail};
}

Outcome ablation_mechanics(const fs::path& work) {
  RunConfig base;
  base.set("model.base_channels", "8");
  base.set("data.train_count", "16");
  base.set("data.test_count", "8");
  base.set("train.epochs", "2");
  base.set("train.batch", "4");
  AblationSpec spec;
  spec.rows = default_ablation_rows();
  const auto t0 = Clock::now();
  fs::remove_all(work / "ablation");
  fs::remove_all(work / "ablation_repeat");
  const AblationTable a = run_ablation(spec, base, work / "ablation");
  const AblationTable b = run_ablation(spec, base, work / "ablation_repeat");
  std::size_t ok = 0, repro = 0;
  for (std::size_t i = 0; i < a.results.size(); ++i) {
    ok += a.results[i].ok;
    const fs::path row = ablation_row_dir(spec, a.results[i].row, a.results[i].seed);
    bool same = true;
    for (const char* f : {"history.csv", "metrics.json", "model.ckpt"}) {
      same = same && slurp(work / "ablation" / row / f) == slurp(work / "ablation_repeat" / row / f);
    }
    repro += same && a.results[i].ok;
  }
  if (a.results.size() != 6) return {false, "expected 6 rows"};
  const auto& r = a.results;
  const bool ordered = r[0].params < r[1].params && r[1].params < r[2].params && r[2].params <= r[5].params;
  RunConfig full = base;
  const bool full_default = r[5].row == "full" && spec.rows[5].overrides.empty() &&
                            SANet<float>(full.model, 1).params().trainable_count() == r[5].params;
  return {ok == 6 && repro == 6 && ordered && full_default,
          fmt("%zu/6 rows completed, %zu/6 reproduced, params %zu < %zu < %zu <= %zu, %.0f s", ok, repro,
              r[0].params, r[1].params, r[2].params, r[5].params, seconds_since(t0))};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  fs::path work = fs::temp_directory_path() / "sanet_acceptance";
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      std::string item;
      while (std::getline(ss, item, ',')) only.insert(std::stoi(item));
    } else if (a == "--work" && i + 1 < argc) {
      work = argv[++i];
    } else {
      std::fprintf(stderr, "usage: acceptance [--only 1,2,...] [--work DIR]\n");
      return 2;
    }
  }
  fs::create_directories(work);
  auto wanted = [&](int n) { return only.empty() || only.count(n); };

  bool ran7 = false, ran8 = false;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"convolution oracle", conv_oracle},
      {"gradient suite", gradient_suite},
      {"fusion identities", safm_identities},
      {"architecture identity", architecture_identity},
      {"metric oracles", metric_oracles},
      {"optimizer oracle", optimizer_oracle},
      {"overfit bar", [&] { ran7 = true; return overfit(work / "overfit"); }},
      {"synthetic end-to-end bar", [&] { ran8 = true; return synthetic_bar(work / "synthetic"); }},
      {"determinism", [&] { return determinism(work, ran7, ran8); }},
      {"ablation mechanics", [&] { return ablation_mechanics(work); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int n = static_cast<int>(i + 1);
    if (!wanted(n)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %2d %-26s %s  %s\n", n, criteria[i].first, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
