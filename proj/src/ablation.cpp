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

#include "sanet/ablation.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "sanet/network.hpp"
#include "sanet/pipeline.hpp"

namespace sanet {

namespace fs = std::filesystem;

std::vector<AblationRow> default_ablation_rows() {
  return {
      {"baseline", {{"model.use_pinwheel", "false"}, {"model.use_cbam", "false"}, {"model.use_safm", "false"}}},
      {"+PConv", {{"model.use_cbam", "false"}, {"model.use_safm", "false"}}},
      {"+PConv+CBAM", {{"model.use_safm", "false"}}},
      {"SAFM w/o residual", {{"model.safm_residual", "false"}}},
      {"SAFM lambda=1", {{"model.lambda_learnable", "false"}}},
      {"full", {}},
  };
}

AblationSpec parse_ablation_spec(const std::string& text) {
  AblationSpec spec;
  for (const auto& [section, entries] : parse_sections(text)) {
    if (section.empty()) {
      for (const auto& [k, v] : entries) {
        if (k != "seeds") {
          spec.base.emplace_back(k, v);
          continue;
        }
        std::stringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ',')) {
          RunConfig probe;
          probe.set("seed", item.substr(item.find_first_not_of(' ')));
          spec.seeds.push_back(probe.seed);
        }
      }
    } else {
      for (const auto& row : spec.rows) {
        if (row.name == section) throw ConfigError("duplicate ablation row [" + section + "]");
      }
      spec.rows.push_back({section, entries});
    }
  }
  if (spec.rows.empty()) spec.rows = default_ablation_rows();
  // Catch unknown keys before any training starts.
  RunConfig probe;
  for (const auto& [k, v] : spec.base) probe.set(k, v);
  for (const auto& row : spec.rows) {
    RunConfig r = probe;
    for (const auto& [k, v] : row.overrides) r.set(k, v);
  }
  return spec;
}

AblationSpec load_ablation_spec(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open ablation spec " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_ablation_spec(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string ablation_row_dir(const AblationSpec& spec, const std::string& row, std::uint64_t seed) {
  std::string dir;
  for (char c : row) dir += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  if (spec.seeds.size() > 1) dir += "_seed" + std::to_string(seed);
  return dir;
}

AblationTable run_ablation(const AblationSpec& spec, const RunConfig& base, const fs::path& out,
                           bool verbose) {
  RunConfig shared = base;
  for (const auto& [k, v] : spec.base) shared.set(k, v);
  std::vector<std::uint64_t> seeds = spec.seeds;
  if (seeds.empty()) seeds.push_back(shared.seed);

  AblationTable table;
  for (std::uint64_t seed : seeds) {
    for (const auto& row : spec.rows) {
      AblationResult r;
      r.row = row.name;
      r.seed = seed;
      try {
        RunConfig cfg = shared;
        cfg.set("seed", std::to_string(seed));
        for (const auto& [k, v] : row.overrides) cfg.set(k, v);
        const fs::path dir = out / ablation_row_dir(spec, row.name, seed);
        Manifest manifest;
        manifest.command = "train";
        const TrainRun run = run_train(cfg, dir, manifest);
        manifest.write(dir, cfg);
        const std::size_t side_h = cfg.resize ? cfg.resize : cfg.synth.height;
        const std::size_t side_w = cfg.resize ? cfg.resize : cfg.synth.width;
        r.params = run.params;
        r.flops = SANet<float>(cfg.model, cfg.seed).cost(side_h, side_w).flops;
        r.final_loss = run.result.history.empty() ? 0.0 : run.result.history.back().loss;
        r.report = run.test;
        r.report.id = row.name;
        r.ok = true;
      } catch (const std::exception& e) {
        r.error = e.what();
      }
      if (verbose) {
        std::clog << "ablation " << row.name << " seed " << seed << ": "
                  << (r.ok ? "done" : "FAILED " + r.error) << std::endl;
      }
      table.results.push_back(std::move(r));
    }
  }
  return table;
}

const AblationResult* AblationTable::reference(const AblationResult& r) const {
  for (const auto& c : results) {
    if (c.seed == r.seed) return c.ok ? &c : nullptr;
  }
  return nullptr;
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : "NA"; }

std::string delta(const std::optional<double>& a, const std::optional<double>& b) {
  return a && b ? num(*a - *b) : "NA";
}

}  // namespace

std::string AblationTable::to_csv() const {
  std::string out =
      "row,seed,status,params,flops,final_loss,iou,niou,pd,fa,d_iou,d_niou,d_pd,d_fa,error\n";
  for (const auto& r : results) {
    out += "\"" + r.row + "\"," + std::to_string(r.seed) + ",";
    if (!r.ok) {
      std::string msg = r.error;
      for (char& c : msg) {
        if (c == '"' || c == '\n') c = '\'';
      }
      out += "failed,,,,,,,,,,,,\"" + msg + "\"\n";
      continue;
    }
    const AblationResult* ref = reference(r);
    const MetricReport& m = r.report;
    out += "ok," + std::to_string(r.params) + "," + std::to_string(r.flops) + "," + num(r.final_loss) + "," +
           num(m.iou) + "," + num(m.niou) + "," + opt_num(m.pd) + "," + num(m.fa) + ",";
    if (ref) {
      const MetricReport& b = ref->report;
      out += num(m.iou - b.iou) + "," + num(m.niou - b.niou) + "," + delta(m.pd, b.pd) + "," + num(m.fa - b.fa);
    } else {
      out += "NA,NA,NA,NA";
    }
    out += ",\n";
  }
  return out;
}

std::string AblationTable::to_text() const {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-20s %5s %9s %8s %8s %8s %10s %9s %9s %9s\n", "row", "seed", "params",
                "IoU", "nIoU", "Pd", "Fa(1e-6)", "dIoU", "dnIoU", "dPd");
  out += line;
  for (const auto& r : results) {
    if (!r.ok) {
      std::snprintf(line, sizeof line, "%-20s %5llu  FAILED: %.180s\n", r.row.c_str(),
                    static_cast<unsigned long long>(r.seed), r.error.c_str());
      out += line;
      continue;
    }
    const AblationResult* ref = reference(r);
    const MetricReport& m = r.report;
    auto pct = [](const std::optional<double>& v) { return v ? num(*v).substr(0, 6) : std::string("NA"); };
    std::string dpd = "NA", diou = "NA", dniou = "NA";
    if (ref) {
      diou = num(m.iou - ref->report.iou).substr(0, 7);
      dniou = num(m.niou - ref->report.niou).substr(0, 7);
      dpd = delta(m.pd, ref->report.pd).substr(0, 7);
    }
    std::snprintf(line, sizeof line, "%-20s %5llu %9zu %8.4f %8.4f %8s %10.2f %9s %9s %9s\n", r.row.c_str(),
                  static_cast<unsigned long long>(r.seed), r.params, m.iou, m.niou, pct(m.pd).c_str(),
                  m.fa_per_million(), diou.c_str(), dniou.c_str(), dpd.c_str());
    out += line;
  }
  return out;
}

}  // namespace sanet
