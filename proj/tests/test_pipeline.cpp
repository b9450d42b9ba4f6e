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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "sanet/ablation.hpp"
#include "sanet/checkpoint.hpp"
#include "sanet/pipeline.hpp"

using namespace sanet;
namespace fs = std::filesystem;

namespace {

RunConfig small() {
  RunConfig c;
  c.set("model.base_channels", "8");
  c.set("model.stages", "3");
  c.set("synth.height", "32");
  c.set("synth.width", "32");
  c.set("data.train_count", "6");
  c.set("data.test_count", "3");
  c.set("train.epochs", "2");
  c.set("train.batch", "3");
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("sanet_pipeline_" + name);
  fs::remove_all(p);
  return p;
}

std::vector<std::string> csv_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

TEST_CASE("pipeline: data sources") {
  RunConfig c = small();
  DataSplit d = prepare_data(c);
  CHECK(d.train.size() == 6);
  CHECK(d.test.size() == 3);
  CHECK(d.train_source == "synthetic");
  CHECK(d.test.front().id == "synth_1_6");

  c.set("data.test_count", "0");
  c.set("data.holdout", "0.5");
  d = prepare_data(c);
  CHECK(d.train.size() == 3);
  CHECK(d.test.size() == 3);
  CHECK(d.test_source == "holdout");
  std::vector<std::string> ids;
  for (const auto& s : d.train) ids.push_back(s.id);
  for (const auto& s : d.test) CHECK(std::find(ids.begin(), ids.end(), s.id) == ids.end());

  const fs::path root = scratch("sources");
  Manifest m;
  run_synth(small(), root, m);
  CHECK(m.files.size() == 2 * 9);
  for (const auto& f : m.files) CHECK(fs::exists(root / f));
  RunConfig from_dirs = small();
  from_dirs.set("data.train_dir", (root / "train").string());
  from_dirs.set("data.test_dir", (root / "test").string());
  d = prepare_data(from_dirs);
  const DataSplit synthetic = prepare_data(small());
  REQUIRE(d.test.size() == synthetic.test.size());
  for (std::size_t i = 0; i < d.test.size(); ++i) {
    CHECK(d.test[i].mask == synthetic.test[i].mask);
    for (std::size_t j = 0; j < d.test[i].image.size(); ++j) {
      CHECK(std::abs(d.test[i].image[j] - synthetic.test[i].image[j]) <= 0.5f / 255.0f + 1e-6f);
    }
  }

  from_dirs.set("data.resize", "30");
  CHECK_THROWS_AS(prepare_data(from_dirs), ConfigError);  // not a multiple of 4
  from_dirs.set("data.resize", "28");
  d = prepare_data(from_dirs);
  CHECK(d.train.front().image.dim(1) == 28);

  RunConfig missing = small();
  missing.set("data.train_dir", (root / "nope").string());
  CHECK_THROWS_AS(prepare_data(missing), IoError);
  fs::remove_all(root);
}

TEST_CASE("pipeline: train, eval and infer write reproducible artifacts") {
  const RunConfig cfg = small();
  const fs::path a = scratch("train_a"), b = scratch("train_b"), e = scratch("eval");
  Manifest ma, mb;
  ma.command = mb.command = "train";
  const TrainRun run = run_train(cfg, a, ma);
  ma.write(a, cfg);
  run_train(cfg, b, mb);
  mb.write(b, cfg);
  CHECK(run.result.history.size() == 2);
  CHECK(ma.files == std::vector<std::string>{"history.csv", "model.ckpt", "metrics.json", "metrics.csv",
                                              "config.ini"});
  for (const auto& f : ma.files) {
    INFO(f);
    CHECK(slurp(a / f) == slurp(b / f));
  }
  CHECK(slurp(a / "manifest.json") == slurp(b / "manifest.json"));
  CHECK(slurp(a / "manifest.json").find("\"model.base_channels\": \"8\"") != std::string::npos);

  // Evaluating the saved model with the saved config reproduces the report.
  const RunConfig reloaded = load_config(a / "config.ini");
  Manifest me;
  const MetricReport rep = run_eval(reloaded, a / "model.ckpt", e, me);
  CHECK(slurp(e / "metrics.json") == slurp(a / "metrics.json"));
  CHECK(slurp(e / "metrics.csv") == slurp(a / "metrics.csv"));
  CHECK(rep.iou == run.test.iou);
  CHECK_THROWS_AS(run_eval(reloaded, a / "missing.ckpt", e, me), IoError);
  {
    std::ofstream out(e / "bad.ckpt", std::ios::binary);
    out << "not a checkpoint";
  }
  CHECK_THROWS_AS(run_eval(reloaded, e / "bad.ckpt", e, me), IoError);

  // Inference on one test scene.
  const Dataset test = prepare_test_data(cfg);
  const fs::path in = scratch("infer_in"), out = scratch("infer_out");
  save_sample(test[0], in);
  Manifest mi;
  run_infer(cfg, a / "model.ckpt", {in / "images" / (test[0].id + ".pgm")},
            {in / "masks" / (test[0].id + ".pgm")}, out, mi);
  REQUIRE(mi.files.size() == 2);
  const Tensor<float> mask = read_pgm(out / mi.files[0]);
  const auto net = load_checkpoint(a / "model.ckpt").net;
  const Tensor<float> image = read_pgm(in / "images" / (test[0].id + ".pgm"));
  const Mask expect = binarize(plane(predict(net, image.reshaped({1, 1, 32, 32})), 0), 0.5);
  CHECK(binarize(mask.reshaped({32, 32}), 0.5) == expect);
  const std::string ppm = slurp(out / mi.files[1]);
  CHECK(ppm.rfind("P6\n32 32\n255\n", 0) == 0);
  CHECK(ppm.size() == 13 + 32 * 32 * 3);
  Manifest again;
  const fs::path out2 = scratch("infer_out2");
  run_infer(cfg, a / "model.ckpt", {in / "images" / (test[0].id + ".pgm")}, {}, out2, again);
  CHECK(slurp(out2 / mi.files[0]) == slurp(out / mi.files[0]));
  for (const auto& p : {a, b, e, in, out, out2}) fs::remove_all(p);
}

TEST_CASE("pipeline: periodic checkpoints are listed in the manifest") {
  RunConfig cfg = small();
  cfg.set("train.epochs", "4");
  cfg.set("train.checkpoint_every", "2");
  const fs::path dir = scratch("ckpt");
  Manifest m;
  run_train(cfg, dir, m);
  CHECK(std::count(m.files.begin(), m.files.end(), "checkpoints/epoch_2.ckpt") == 1);
  CHECK(std::count(m.files.begin(), m.files.end(), "checkpoints/epoch_4.ckpt") == 1);
  for (const auto& f : m.files) CHECK(fs::exists(dir / f));
  fs::remove_all(dir);
}

TEST_CASE("overlay: tint, outline and grey levels") {
  Tensor<float> img({1, 3, 3}, 0.5f);
  img[0] = 0.0f;
  Mask pred({3, 3}), gt({3, 3});
  pred[4] = 1;
  for (std::size_t i : {1u, 3u, 4u, 5u, 7u}) gt[i] = 1;
  const std::string ppm = overlay_ppm(img, pred, &gt);
  const std::string header = "P6\n3 3\n255\n";
  REQUIRE(ppm.size() == header.size() + 27);
  auto px = [&](std::size_t i) {
    const auto* p = reinterpret_cast<const unsigned char*>(ppm.data() + header.size() + 3 * i);
    return std::array<int, 3>{p[0], p[1], p[2]};
  };
  CHECK(px(0) == std::array<int, 3>{0, 0, 0});
  CHECK(px(2) == std::array<int, 3>{128, 128, 128});
  CHECK(px(4) == std::array<int, 3>{192, 64, 64});   // interior of the plus: tinted, not outlined
  CHECK(px(1) == std::array<int, 3>{0, 255, 0});     // plus arm: outline
  CHECK(overlay_ppm(img, pred).size() == ppm.size());
  CHECK_THROWS_AS(overlay_ppm(Tensor<float>({1, 2, 2}), pred), ShapeError);
}

TEST_CASE("bench: median over the configured runs") {
  RunConfig cfg = small();
  cfg.set("bench.runs", "11");
  const BenchResult r = run_bench(cfg);
  CHECK(r.runs_ms.size() == 11);
  auto sorted = r.runs_ms;
  std::sort(sorted.begin(), sorted.end());
  CHECK(r.median_ms == sorted[5]);
  CHECK(r.params == SANet<float>(cfg.model, 1).params().trainable_count());
  CHECK(r.flops == SANet<float>(cfg.model, 1).cost(32, 32).flops);
  CHECK(r.to_json().find("\"median_ms\"") != std::string::npos);
}

TEST_CASE("ablation: default rows and their flags") {
  const auto rows = default_ablation_rows();
  REQUIRE(rows.size() == 6);
  auto config_of = [](const AblationRow& r) {
    RunConfig c;
    for (const auto& [k, v] : r.overrides) c.set(k, v);
    return c;
  };
  const RunConfig base = config_of(rows[0]);
  CHECK(rows[0].name == "baseline");
  CHECK_FALSE(base.model.dsm.use_pinwheel);
  CHECK_FALSE(base.model.dsm.plain_branch_b);
  CHECK_FALSE(base.model.dsm.use_cbam);
  CHECK_FALSE(base.model.use_safm);
  CHECK(config_of(rows[1]).model.dsm.use_pinwheel);
  CHECK_FALSE(config_of(rows[1]).model.dsm.use_cbam);
  CHECK(config_of(rows[2]).model.dsm.use_cbam);
  CHECK_FALSE(config_of(rows[2]).model.use_safm);
  CHECK_FALSE(config_of(rows[3]).model.safm.residual);
  CHECK_FALSE(config_of(rows[4]).model.safm.lambda_learnable);
  CHECK(rows[5].name == "full");
  CHECK(config_of(rows[5]).to_text() == RunConfig{}.to_text());
}

TEST_CASE("ablation: spec files") {
  const AblationSpec s = parse_ablation_spec(
      "train.epochs = 3\nseeds = 4, 9\n[plain]\nmodel.use_pinwheel = false\n[full]\n");
  CHECK(s.base == Overrides{{"train.epochs", "3"}});
  CHECK(s.seeds == std::vector<std::uint64_t>{4, 9});
  REQUIRE(s.rows.size() == 2);
  CHECK(s.rows[0].name == "plain");
  CHECK(s.rows[0].overrides == Overrides{{"model.use_pinwheel", "false"}});
  CHECK(s.rows[1].overrides.empty());
  CHECK(ablation_row_dir(s, "+PConv+CBAM", 4) == "_PConv_CBAM_seed4");

  CHECK(parse_ablation_spec("train.epochs = 3\n").rows.size() == 6);
  CHECK_THROWS_AS(parse_ablation_spec("[a]\nmodel.nope = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_ablation_spec("[a]\n[a]\n"), ConfigError);
  CHECK_THROWS_AS(parse_ablation_spec("seeds = 1, x\n"), ConfigError);
  CHECK_THROWS_AS(load_ablation_spec("/nonexistent/spec.ini"), IoError);
}

TEST_CASE("ablation: matrix mechanics, deltas and failure isolation") {
  RunConfig base = small();
  base.set("train.epochs", "1");
  AblationSpec spec;
  spec.rows = default_ablation_rows();
  spec.rows.insert(spec.rows.begin() + 3, AblationRow{"broken", {{"train.batch", "0"}}});
  const fs::path out = scratch("ablation");
  const AblationTable t = run_ablation(spec, base, out);
  REQUIRE(t.results.size() == 7);
  CHECK_FALSE(t.results[3].ok);
  CHECK(t.results[3].error.find("batch") != std::string::npos);
  for (std::size_t i : {0u, 1u, 2u, 4u, 5u, 6u}) {
    INFO(t.results[i].row);
    CHECK(t.results[i].ok);
    CHECK(fs::exists(out / ablation_row_dir(spec, t.results[i].row, 1) / "metrics.json"));
  }
  CHECK(t.results[0].params < t.results[1].params);
  CHECK(t.results[1].params < t.results[2].params);
  CHECK(t.results[2].params <= t.results[6].params);
  CHECK(t.results[6].params == SANet<float>(base.model, 1).params().trainable_count());

  // Deltas recomputed from the reported metrics.
  std::istringstream csv(t.to_csv());
  std::string line;
  std::getline(csv, line);
  const auto header = csv_fields(line);
  auto col = [&](const char* name) {
    return static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin());
  };
  std::vector<std::vector<std::string>> rows;
  while (std::getline(csv, line)) rows.push_back(csv_fields(line));
  REQUIRE(rows.size() == 7);
  CHECK(rows[3][col("status")] == "failed");
  for (const auto& r : rows) {
    if (r[col("status")] != "ok") continue;
    for (const char* m : {"iou", "niou", "fa"}) {
      const double d = std::stod(r[col((std::string("d_") + m).c_str())]);
      CHECK(d == doctest::Approx(std::stod(r[col(m)]) - std::stod(rows[0][col(m)])).epsilon(1e-5));
    }
  }
  CHECK(t.to_text().find("FAILED") != std::string::npos);

  // Rerunning one row alone reproduces its artifacts.
  AblationSpec one;
  one.rows = {spec.rows[2]};
  const fs::path again = scratch("ablation_again");
  const AblationTable t2 = run_ablation(one, base, again);
  REQUIRE(t2.results[0].ok);
  const std::string dir = ablation_row_dir(spec, spec.rows[2].name, 1);
  for (const char* f : {"metrics.json", "history.csv", "model.ckpt"}) {
    CHECK(slurp(again / dir / f) == slurp(out / dir / f));
  }
  fs::remove_all(out);
  fs::remove_all(again);
}
