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

#include <string>

#include "truce/numerics/ops.hpp"
#include "truce/util/rng.hpp"

namespace truce::inline TRUCE_PRECISION::seq {

using num::ParameterStore;
using num::Tape;
using num::Var;

struct LstmState {
  Var h;  // [m x H]
  Var c;  // [m x H]
};

// Zero state for m rows.
LstmState lstm_zero_state(Tape& tape, int m, int hidden);

// One step given the precomputed input contribution x_part = x * W_x + b
// ([m x 4H] or [1 x 4H], broadcast over rows).
LstmState lstm_step(Var x_part, const LstmState& prev, Var w_h);

// Keeps rows whose mask is 0 at their previous state: m * next + (1 - m) * prev.
LstmState lstm_masked(const LstmState& next, const LstmState& prev, Var mask, Var inv_mask);

// Registers `<prefix>.w_x` [in x 4H], `<prefix>.w_h` [H x 4H], `<prefix>.b` [1 x 4H].
void lstm_init(ParameterStore& ps, const std::string& prefix, int in, int hidden, Rng& rng, double bound);

}  // namespace truce::inline TRUCE_PRECISION::seq
