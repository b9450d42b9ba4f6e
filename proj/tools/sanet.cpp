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

// Command-line driver: sanet <train|eval|infer|synth|gradcheck|bench|ablate>.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sanet/ablation.hpp"
#include "sanet/check_suite.hpp"
#include "sanet/config.hpp"
#include "sanet/pipeline.hpp"

namespace fs = std::filesystem;
using namespace sanet;

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kIo = 3, kNumerical = 4 };

int fail(int code, const std::string& category, std::string message) {
  for (char& c : message) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  std::cerr << "error: " << category << ": " << message << std::endl;
  return code;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

std::string fmt_pd(const std::optional<double>& pd) {
  if (!pd) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *pd);
  return buf;
}

void print_report(const MetricReport& m) {
  std::printf("IoU %.4f  nIoU %.4f  Pd %s  Fa %.2f x 1e-6  (%zu images, %zu targets)\n", m.iou, m.niou,
              fmt_pd(m.pd).c_str(), m.fa_per_million(), m.images, m.gt_targets);
  for (const auto& w : m.warnings) std::printf("warning: %s\n", w.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Small infrared target segmentation: training, evaluation and tooling."};
  app.require_subcommand(1);
  app.fallthrough();
  app.footer(config_help());

  std::string config_path, out_dir = "sanet-out";
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "Config file of key = value lines");
  app.add_option("--set", overrides, "Override one config key (key=value); repeatable")->allow_extra_args(false);
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();

  auto* train_cmd = app.add_subcommand("train", "Train from scratch and evaluate on the test set");
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on the test set");
  auto* infer_cmd = app.add_subcommand("infer", "Predict masks and overlays for PGM images");
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic dataset (train/ and test/)");
  auto* grad_cmd = app.add_subcommand("gradcheck", "Finite-difference check of every layer and the network");
  auto* bench_cmd = app.add_subcommand("bench", "Parameters, FLOPs and median forward latency");
  auto* ablate_cmd = app.add_subcommand("ablate", "Train and evaluate the ablation rows");

  std::string checkpoint;
  for (auto* c : {eval_cmd, infer_cmd}) c->add_option("--checkpoint", checkpoint, "Model checkpoint")->required();
  std::vector<std::string> images, masks;
  infer_cmd->add_option("--image", images, "Input PGM image; repeatable")->required();
  infer_cmd->add_option("--mask", masks, "Ground-truth PGM mask per image, drawn as an outline");
  std::string spec_path;
  std::vector<std::uint64_t> seeds;
  ablate_cmd->add_option("--spec", spec_path, "Ablation spec file; default: the six standard rows");
  ablate_cmd->add_option("--seeds", seeds, "Seeds to run every row with")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(kConfig, "usage", e.what());
  }

  const fs::path out = out_dir;
  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
    apply_overrides(cfg, overrides);
    cfg.validate();
    Manifest manifest;

    if (train_cmd->parsed()) {
      manifest.command = "train";
      TrainHooks hooks;
      hooks.on_epoch = [](const EpochRecord& r) {
        std::printf("epoch %zu  lr %.3e  loss %.5f", r.epoch, r.lr, r.loss);
        if (r.eval) std::printf("  IoU %.4f  Pd %s  Fa %.2e", r.eval->iou, fmt_pd(r.eval->pd).c_str(), r.eval->fa);
        std::printf("\n");
        std::fflush(stdout);
      };
      const TrainRun run = run_train(cfg, out, manifest, hooks);
      std::printf("test set: ");
      print_report(run.test);
    } else if (eval_cmd->parsed()) {
      manifest.command = "eval";
      print_report(run_eval(cfg, checkpoint, out, manifest));
    } else if (infer_cmd->parsed()) {
      manifest.command = "infer";
      std::vector<fs::path> ip(images.begin(), images.end()), mp(masks.begin(), masks.end());
      for (const auto& p : ip) {
        if (!fs::exists(p)) throw IoError("image " + p.string() + " does not exist");
      }
      run_infer(cfg, checkpoint, ip, mp, out, manifest);
      std::printf("wrote %zu files to %s\n", manifest.files.size(), out.string().c_str());
    } else if (synth_cmd->parsed()) {
      manifest.command = "synth";
      run_synth(cfg, out, manifest);
      std::printf("wrote %zu training and %zu test scenes to %s\n", cfg.train_count, cfg.test_count,
                  out.string().c_str());
    } else if (grad_cmd->parsed()) {
      manifest.command = "gradcheck";
      const auto entries = run_gradcheck_suite(cfg.seed);
      nlohmann::ordered_json j = nlohmann::ordered_json::array();
      for (const auto& e : entries) {
        const auto& r = e.report;
        std::printf("%-30s %s  worst rel %.2e at %s[%zu]  (%zu coords, %.2fs)%s%s\n", e.component.c_str(),
                    r.passed ? "ok  " : "FAIL", r.worst_rel_error, r.worst_input.c_str(), r.worst_index,
                    r.coords_checked, e.seconds, r.failure.empty() ? "" : "  ", r.failure.c_str());
        j.push_back({{"component", e.component}, {"passed", r.passed}, {"worst_rel_error", r.worst_rel_error},
                     {"worst_input", r.worst_input}, {"worst_index", r.worst_index},
                     {"coords_checked", r.coords_checked}, {"failure", r.failure}});
      }
      fs::create_directories(out);
      write_file(out / "gradcheck.json", j.dump(2) + "\n");
      manifest.files.push_back("gradcheck.json");
      manifest.write(out, cfg);
      if (!suite_passed(entries)) {
        for (const auto& e : entries) {
          if (!e.report.passed) return fail(kNumerical, "numerical", "gradcheck failed for " + e.component);
        }
      }
      return kOk;
    } else if (bench_cmd->parsed()) {
      manifest.command = "bench";
      const BenchResult b = run_bench(cfg);
      std::printf("params %zu\nFLOPs %llu (input %zux1x%zux%zu)\nforward median %.3f ms over %zu runs\n",
                  b.params, static_cast<unsigned long long>(b.flops), b.batch, b.height, b.width, b.median_ms,
                  b.runs_ms.size());
      fs::create_directories(out);
      write_file(out / "bench.json", b.to_json() + "\n");
      manifest.files.push_back("bench.json");
    } else if (ablate_cmd->parsed()) {
      manifest.command = "ablate";
      AblationSpec spec;
      if (spec_path.empty()) {
        spec.rows = default_ablation_rows();
      } else {
        spec = load_ablation_spec(spec_path);
      }
      if (!seeds.empty()) spec.seeds = seeds;
      const AblationTable table = run_ablation(spec, cfg, out, true);
      write_file(out / "ablation.csv", table.to_csv());
      write_file(out / "ablation.txt", table.to_text());
      manifest.files.insert(manifest.files.end(), {"ablation.csv", "ablation.txt"});
      for (const auto& r : table.results) {
        if (r.ok) manifest.files.push_back(ablation_row_dir(spec, r.row, r.seed) + "/manifest.json");
      }
      manifest.write(out, cfg);
      std::fputs(table.to_text().c_str(), stdout);
      std::size_t failed = 0;
      for (const auto& r : table.results) failed += !r.ok;
      if (failed) {
        return fail(kFailure, "ablation", std::to_string(failed) + " of " + std::to_string(table.results.size()) +
                                              " rows failed; see ablation.csv");
      }
      return kOk;
    }
    manifest.write(out, cfg);
    return kOk;
  } catch (const ConfigError& e) {
    return fail(kConfig, "config", e.what());
  } catch (const IoError& e) {
    return fail(kIo, "io", e.what());
  } catch (const NumericalError& e) {
    return fail(kNumerical, "numerical", e.what());
  } catch (const std::invalid_argument& e) {
    return fail(kConfig, "config", e.what());
  } catch (const std::exception& e) {
    return fail(kFailure, "internal", e.what());
  }
}
