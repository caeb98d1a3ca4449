// Copyright 2026 the truce-ts authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Central finite-difference oracle for tape gradients. Test-only.

#include <cmath>
#include <functional>
#include <sstream>
#include <string>

#include "truce/numerics/ops.hpp"
#include "truce/numerics/tape.hpp"
#include "truce/util/rng.hpp"

namespace truce::inline TRUCE_PRECISION::testing {

struct GradCheckResult {
  int checked = 0;
  int failed = 0;
  double max_rel = 0.0;
  std::string worst;
};

inline num::Tensor random_tensor(Rng& rng, num::Shape shape, float lo = -1.0f, float hi = 1.0f) {
  num::Tensor t(std::move(shape));
  for (num::real& v : t.storage()) v = rng.uniformf(lo, hi);
  return t;
}

// sum(r * out) with a fixed random projection r, so every output coordinate
// contributes to the checked gradient.
inline num::Var project(num::Var out, std::uint64_t seed) {
  Rng rng(seed);
  num::Tensor r = random_tensor(rng, out.shape());
  return num::sum_all(num::mul(out, out.tape()->constant(std::move(r))));
}

using LossBuilder = std::function<num::Var(num::Tape&, const num::ParameterStore&)>;

// Relative error |a - n| / max(|a|, |n|, floor). The floor keeps coordinates
// whose true derivative is (near) zero from being judged on f32 noise alone.
inline double rel_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

inline double eval_loss(const LossBuilder& build, const num::ParameterStore& ps) {
  num::Tape tape(false);
  return build(tape, ps).value().item();
}

// Compares every coordinate of every parameter (or only those whose name
// starts with `prefix`) against (L(p + h) - L(p - h)) / (2h).
inline GradCheckResult grad_check(num::ParameterStore ps, const LossBuilder& build,
                                  double step = 1e-3, double tol = 1e-3, double floor = 1e-2,
                                  const std::string& prefix = "") {
  num::Tape tape(true);
  num::Var loss = build(tape, ps);
  const num::GradMap grads = tape.backward(loss, &ps);
  GradCheckResult res;
  for (auto& [name, t] : ps) {
    if (name.compare(0, prefix.size(), prefix) != 0) continue;
    const num::Tensor& g = grads.at(name);
    for (std::size_t i = 0; i < t.size(); ++i) {
      const num::real orig = t[i];
      const num::real up = orig + static_cast<num::real>(step);
      const num::real down = orig - static_cast<num::real>(step);
      t[i] = up;
      const double lp = eval_loss(build, ps);
      t[i] = down;
      const double lm = eval_loss(build, ps);
      t[i] = orig;
      const double numeric = (lp - lm) / (static_cast<double>(up) - static_cast<double>(down));
      const double err = rel_error(g[i], numeric, floor);
      ++res.checked;
      if (err > tol) ++res.failed;
      if (err > res.max_rel) {
        res.max_rel = err;
        std::ostringstream os;
        os << name << "[" << i << "] analytic=" << g[i] << " numeric=" << numeric;
        res.worst = os.str();
      }
    }
  }
  return res;
}

}  // namespace truce::testing
