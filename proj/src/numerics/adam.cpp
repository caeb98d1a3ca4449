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

#include "truce/numerics/adam.hpp"

#include <cmath>

#include <spdlog/spdlog.h>

#include "truce/numerics/kernels.hpp"
#include "truce/util/error.hpp"

namespace truce::inline TRUCE_PRECISION::num {

void adam_step(ParameterStore& params, const GradMap& grads, AdamState& state) {
  state.step += 1;
  const auto& cfg = state.config;
  const double t = static_cast<double>(state.step);
  const kernels::AdamScalars s{
      cfg.lr,
      cfg.beta1,
      cfg.beta2,
      cfg.eps,
      static_cast<real>(1.0 / (1.0 - std::pow(static_cast<double>(cfg.beta1), t))),
      static_cast<real>(1.0 / (1.0 - std::pow(static_cast<double>(cfg.beta2), t))),
  };
  for (auto& [name, p] : params) {
    auto [mit, m_new] = state.m.try_emplace(name, p.shape(), 0.0f);
    auto [vit, v_new] = state.v.try_emplace(name, p.shape(), 0.0f);
    (void)m_new;
    (void)v_new;
    if (mit->second.shape() != p.shape() || vit->second.shape() != p.shape()) {
      throw ShapeError("Adam moment shape mismatch for parameter " + name);
    }
    Tensor zero;
    const Tensor* g = nullptr;
    if (auto it = grads.find(name); it != grads.end()) {
      if (it->second.shape() != p.shape()) {
        throw ShapeError("gradient for " + name + " has shape " + shape_str(it->second.shape()) +
                         ", parameter has " + shape_str(p.shape()));
      }
      g = &it->second;
    } else {
      spdlog::debug("adam: no gradient for '{}', treating it as zero", name);
      zero = Tensor(p.shape(), 0.0f);
      g = &zero;
    }
    kernels::active().adam(p.data(), mit->second.data(), vit->second.data(), g->data(), p.size(), s);
  }
}

}  // namespace truce::num
