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

#include <cstdint>

#include "truce/numerics/tensor.hpp"

namespace truce::inline TRUCE_PRECISION::num {

struct AdamConfig {
  real lr = 1e-4f;
  real beta1 = 0.9f;
  real beta2 = 0.999f;
  real eps = 1e-8f;
};

struct AdamState {
  AdamConfig config;
  std::int64_t step = 0;
  ParameterStore m;  // first moments, one per parameter
  ParameterStore v;  // second moments

  explicit AdamState(AdamConfig cfg = {}) : config(cfg) {}
};

// One Adam update of every parameter in `params`. A parameter without an
// entry in `grads` is updated with a zero gradient (logged at debug level).
void adam_step(ParameterStore& params, const GradMap& grads, AdamState& state);

}  // namespace truce::num
