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

#include "truce/seq/lstm.hpp"

namespace truce::inline TRUCE_PRECISION::seq {

using num::real;
using num::Tensor;

LstmState lstm_zero_state(Tape& tape, int m, int hidden) {
  return {tape.constant(Tensor({m, hidden})), tape.constant(Tensor({m, hidden}))};
}

LstmState lstm_step(Var x_part, const LstmState& prev, Var w_h) {
  const int H = prev.h.cols();
  Var gates = num::add(num::matmul(prev.h, w_h), x_part);
  Var hc = num::lstm_cell(gates, prev.c);
  return {num::slice_cols(hc, 0, H), num::slice_cols(hc, H, 2 * H)};
}

LstmState lstm_masked(const LstmState& next, const LstmState& prev, Var mask, Var inv_mask) {
  return {num::add(num::mul(next.h, mask), num::mul(prev.h, inv_mask)),
          num::add(num::mul(next.c, mask), num::mul(prev.c, inv_mask))};
}

void lstm_init(ParameterStore& ps, const std::string& prefix, int in, int hidden, Rng& rng, double bound) {
  auto draw = [&](num::Shape shape) {
    Tensor t(std::move(shape));
    for (real& v : t.storage()) v = static_cast<real>(rng.uniform(-bound, bound));
    return t;
  };
  ps[prefix + ".w_x"] = draw({in, 4 * hidden});
  ps[prefix + ".w_h"] = draw({hidden, 4 * hidden});
  ps[prefix + ".b"] = Tensor({1, 4 * hidden});
}

}  // namespace truce::inline TRUCE_PRECISION::seq
