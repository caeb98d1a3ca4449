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

#include "truce/seq/inference_net.hpp"

#include <algorithm>
#include <cmath>

#include "truce/data/vocab.hpp"
#include "truce/util/error.hpp"

namespace truce::inline TRUCE_PRECISION::seq {

using num::real;
using num::Tensor;

InferenceNet::InferenceNet(InferenceConfig cfg) : cfg_(cfg) {
  if (cfg_.vocab <= data::kUnk || cfg_.embed < 1 || cfg_.hidden < 1 || cfg_.programs < 1)
    throw ArgumentError("inference network: sizes must be positive");
}

void InferenceNet::init_params(ParameterStore& ps, Rng& rng) const {
  auto draw = [&](num::Shape shape, double bound) {
    Tensor t(std::move(shape));
    for (real& v : t.storage()) v = static_cast<real>(rng.uniform(-bound, bound));
    return t;
  };
  ps["inf.embed"] = draw({cfg_.vocab, cfg_.embed}, 0.1);
  lstm_init(ps, "inf.fwd", cfg_.embed, cfg_.hidden, rng, 0.1);
  lstm_init(ps, "inf.bwd", cfg_.embed, cfg_.hidden, rng, 0.1);
  ps["inf.out_w"] = draw({2 * cfg_.hidden, cfg_.programs}, 0.1);
  ps["inf.out_b"] = Tensor({1, cfg_.programs});
}

Var InferenceNet::log_posterior(Tape& tape, const ParameterStore& ps,
                                const std::vector<std::vector<int>>& captions) const {
  if (captions.empty()) throw ArgumentError("inference network: empty batch");
  const int B = static_cast<int>(captions.size());
  std::size_t len = 0;
  for (const auto& c : captions) {
    if (c.empty()) throw ArgumentError("inference network: empty caption");
    for (int id : c)
      if (id < 0 || id >= cfg_.vocab) throw ArgumentError("token id " + std::to_string(id) + " outside vocabulary");
    len = std::max(len, c.size());
  }
  const int L = static_cast<int>(len);
  // token ids position-major: row s * B + b
  std::vector<int> ids(static_cast<std::size_t>(L) * B, data::kPad);
  bool ragged = false;
  for (int b = 0; b < B; ++b) {
    ragged = ragged || static_cast<int>(captions[b].size()) != L;
    for (std::size_t s = 0; s < captions[b].size(); ++s) ids[s * B + b] = captions[b][s];
  }
  Var emb = num::gather_rows(tape.parameter(ps, "inf.embed"), ids);

  auto run = [&](const char* dir, bool reverse) {
    const std::string p = std::string("inf.") + dir;
    Var xw = num::add(num::matmul(emb, tape.parameter(ps, p + ".w_x")), tape.parameter(ps, p + ".b"));
    Var w_h = tape.parameter(ps, p + ".w_h");
    LstmState st = lstm_zero_state(tape, B, cfg_.hidden);
    for (int k = 0; k < L; ++k) {
      const int s = reverse ? L - 1 - k : k;
      LstmState next = lstm_step(num::slice_rows(xw, s * B, (s + 1) * B), st, w_h);
      if (ragged) {
        Tensor mask({B, 1}), inv({B, 1});
        for (int b = 0; b < B; ++b) {
          const bool on = s < static_cast<int>(captions[b].size());
          mask[b] = on ? 1 : 0;
          inv[b] = on ? 0 : 1;
        }
        st = lstm_masked(next, st, tape.constant(std::move(mask)), tape.constant(std::move(inv)));
      } else {
        st = next;
      }
    }
    return st.h;
  };
  Var h = num::concat_cols({run("fwd", false), run("bwd", true)});
  Var logits = num::add(num::matmul(h, tape.parameter(ps, "inf.out_w")), tape.parameter(ps, "inf.out_b"));
  return num::log_softmax_rows(logits);
}

std::vector<double> InferenceNet::posterior(const ParameterStore& ps, const std::vector<int>& caption) const {
  Tape tape(false);
  Var lq = log_posterior(tape, ps, {caption});
  std::vector<double> q(cfg_.programs);
  for (int z = 0; z < cfg_.programs; ++z) q[z] = std::exp(static_cast<double>(lq.value()[z]));
  return q;
}

}  // namespace truce::inline TRUCE_PRECISION::seq
