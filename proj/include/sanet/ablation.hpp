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
#include <utility>
#include <vector>

#include "sanet/config.hpp"
#include "sanet/metrics.hpp"

namespace sanet {

using Overrides = std::vector<std::pair<std::string, std::string>>;

struct AblationRow {
  std::string name;
  Overrides overrides;  // applied on top of the shared base config
};

struct AblationSpec {
  Overrides base;                    // shared by every row
  std::vector<AblationRow> rows;     // first row is the delta reference
  std::vector<std::uint64_t> seeds;  // empty: the base config's seed
};

// baseline (plain conv blocks, concatenation skips), +PConv, +PConv+CBAM,
// SAFM without residual, SAFM with lambda fixed at 1, full.
std::vector<AblationRow> default_ablation_rows();

// Config-file syntax. Keys before the first section apply to every row;
// "seeds = 1, 2" lists seeds. Each "[name]" section is one row holding full
// config keys. Without sections the default rows are used.
AblationSpec parse_ablation_spec(const std::string& text);
AblationSpec load_ablation_spec(const std::filesystem::path& path);

struct AblationResult {
  std::string row;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;  // set when the row failed
  std::size_t params = 0;
  std::uint64_t flops = 0;
  double final_loss = 0;
  MetricReport report;
};

struct AblationTable {
  std::vector<AblationResult> results;  // row order within each seed

  // Reference (first) row with the same seed, or nullptr when it failed.
  const AblationResult* reference(const AblationResult& r) const;
  std::string to_csv() const;
  std::string to_text() const;
};

// One fresh train + eval per (seed, row) under out/<row>[_seed<s>]/. A row
// that throws is recorded as failed and the rest still run.
AblationTable run_ablation(const AblationSpec& spec, const RunConfig& base,
                           const std::filesystem::path& out, bool verbose = false);

// Directory name used for a row.
std::string ablation_row_dir(const AblationSpec& spec, const std::string& row, std::uint64_t seed);

}  // namespace sanet
