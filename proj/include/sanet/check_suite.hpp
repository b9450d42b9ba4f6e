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
#include <string>
#include <vector>

#include "sanet/gradcheck.hpp"

namespace sanet {

struct SuiteEntry {
  std::string component;
  GradcheckReport report;
  double seconds = 0.0;
};

// Finite-difference checks of every differentiable layer, each attention
// sub-module, the skip fusion (including its strength), the loss and a tiny
// end-to-end network in both modes, all in double precision at rtol 1e-4.
std::vector<SuiteEntry> run_gradcheck_suite(std::uint64_t seed = 1);

inline bool suite_passed(const std::vector<SuiteEntry>& entries) {
  for (const auto& e : entries) {
    if (!e.report.passed) return false;
  }
  return !entries.empty();
}

}  // namespace sanet
