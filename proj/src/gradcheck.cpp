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

#include "sanet/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace sanet {

namespace {

double evaluate(const ScalarGraph& f) {
  Tape<double> tape;
  tape.set_enabled(false);
  Var<double> out = f(tape);
  return out.value()[0];
}

double rel_error(double a, double n) {
  return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-8});
}

std::vector<std::size_t> pick_coords(std::size_t n, const GradcheckOptions& opt,
                                     std::mt19937_64& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (opt.max_coords_per_tensor == 0 || opt.max_coords_per_tensor >= n) return idx;
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(opt.max_coords_per_tensor);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

GradcheckReport gradcheck(const ScalarGraph& f, const std::vector<NamedVar>& inputs,
                          const GradcheckOptions& opt) {
  GradcheckReport report;
  std::vector<Var<double>> vars;
  for (const auto& in : inputs) {
    Var<double> v = in.var;
    v.set_requires_grad(true);
    v.zero_grad();
    vars.push_back(v);
  }

  Tape<double> tape;
  Var<double> out = f(tape);
  if (out.size() != 1) {
    report.passed = false;
    report.failure = "graph output is not scalar";
    return report;
  }
  if (!out.value().all_finite()) {
    report.passed = false;
    report.failure = "non-finite graph output";
    return report;
  }
  tape.backward(out);
  const double f0 = out.value()[0];

  std::mt19937_64 rng(opt.seed);
  for (std::size_t t = 0; t < vars.size(); ++t) {
    Var<double>& v = vars[t];
    const Tensor<double> analytic =
        v.has_grad() ? v.grad() : Tensor<double>(v.shape(), 0.0);
    for (std::size_t i : pick_coords(v.size(), opt, rng)) {
      double& x = v.mutable_value()[i];
      const double orig = x;
      x = orig + opt.eps;
      const double fp = evaluate(f);
      x = orig - opt.eps;
      const double fm = evaluate(f);
      x = orig;
      const double numeric = (fp - fm) / (2.0 * opt.eps);
      const double a = analytic[i];
      ++report.coords_checked;
      if (!std::isfinite(numeric) || !std::isfinite(a)) {
        report.passed = false;
        report.failure = "non-finite value at " + inputs[t].name + "[" +
                         std::to_string(i) + "]";
        report.worst_input = inputs[t].name;
        report.worst_index = i;
        return report;
      }
      double reference = numeric;
      double rel = rel_error(a, numeric);
      if (opt.refine_at_kinks && rel > opt.rtol) {
        ++report.coords_refined;
        // Smaller steps straddle fewer branch switches; larger steps lose
        // less to roundoff when the gradient itself is tiny.
        auto consider = [&](double cand) {
          if (rel_error(a, cand) < rel) {
            rel = rel_error(a, cand);
            reference = cand;
          }
        };
        auto probe = [&](double h) {
          x = orig + h;
          const double hp = evaluate(f);
          x = orig - h;
          const double hm = evaluate(f);
          x = orig;
          consider((hp - f0) / h);
          consider((f0 - hm) / h);
          return (hp - hm) / (2.0 * h);
        };
        consider((fp - f0) / opt.eps);
        consider((f0 - fm) / opt.eps);
        double h = opt.eps;
        for (int level = 0; level < 3 && rel > opt.rtol; ++level) consider(probe(h /= 10.0));
        h = opt.eps;
        for (int level = 0; level < 3 && rel > opt.rtol; ++level) {
          h *= 10.0;
          const double wide = probe(h), half = probe(h / 2.0);
          consider(wide);
          consider((4.0 * half - wide) / 3.0);
        }
      }
      if (rel > report.worst_rel_error) {
        report.worst_rel_error = rel;
        report.worst_input = inputs[t].name;
        report.worst_index = i;
        report.worst_analytic = a;
        report.worst_numeric = reference;
      }
    }
  }
  report.passed = report.worst_rel_error <= opt.rtol;
  return report;
}

GradcheckReport gradcheck(
    const std::function<Var<double>(Tape<double>&, const Var<double>&)>& f,
    const Tensor<double>& x, const GradcheckOptions& opt) {
  Var<double> v = Var<double>::leaf(x, true);
  return gradcheck([&](Tape<double>& tape) { return f(tape, v); }, {{"x", v}}, opt);
}

}  // namespace sanet
