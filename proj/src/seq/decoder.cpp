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

#include "truce/seq/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "truce/data/vocab.hpp"
#include "truce/util/error.hpp"

namespace truce::inline TRUCE_PRECISION::seq {

using num::real;
using num::Tensor;

namespace {

std::vector<double> softmax_double(const real* logits, int n, double temperature) {
  double mx = -INFINITY;
  for (int i = 0; i < n; ++i) mx = std::max(mx, static_cast<double>(logits[i]) / temperature);
  std::vector<double> p(n);
  double z = 0.0;
  for (int i = 0; i < n; ++i) z += p[i] = std::exp(static_cast<double>(logits[i]) / temperature - mx);
  for (double& v : p) v /= z;
  return p;
}

}  // namespace

int pick_token(const std::vector<double>& probs, const SampleConfig& cfg, Rng* rng) {
  if (probs.empty()) throw ArgumentError("pick_token: empty distribution");
  if (cfg.mode == SampleMode::greedy) return static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
  if (!(cfg.top_p > 0.0 && cfg.top_p <= 1.0)) throw ArgumentError("top_p must lie in (0, 1]");
  if (!rng) throw ArgumentError("nucleus sampling needs a generator");
  std::vector<int> order(probs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return probs[a] > probs[b]; });
  double mass = 0.0;
  std::size_t keep = 0;
  while (keep < order.size()) {
    mass += probs[order[keep++]];
    if (mass >= cfg.top_p) break;
  }
  const double u = rng->uniform(0.0, mass);
  double acc = 0.0;
  for (std::size_t i = 0; i < keep; ++i) {
    acc += probs[order[i]];
    if (u < acc) return order[i];
  }
  return order[keep - 1];
}

Decoder::Decoder(DecoderConfig cfg) : cfg_(cfg) {
  if (cfg_.vocab <= data::kUnk) throw ArgumentError("decoder: vocabulary too small");
  if (cfg_.embed < 1 || cfg_.hidden < 1 || cfg_.cond_dim < 1 || cfg_.max_len < 3)
    throw ArgumentError("decoder: sizes must be positive and max_len >= 3");
}

void Decoder::init_params(ParameterStore& ps, Rng& rng) const {
  const int H = cfg_.hidden;
  auto draw = [&](num::Shape shape, double bound) {
    Tensor t(std::move(shape));
    for (real& v : t.storage()) v = static_cast<real>(rng.uniform(-bound, bound));
    return t;
  };
  ps["dec.embed"] = draw({cfg_.vocab, cfg_.embed}, 0.1);
  ps["dec.w_tok"] = draw({cfg_.embed, 4 * H}, 0.1);
  ps["dec.w_cond"] = draw({cfg_.cond_dim, 4 * H}, 0.1);
  ps["dec.w_h"] = draw({H, 4 * H}, 0.1);
  ps["dec.b"] = Tensor({1, 4 * H});
  ps["dec.out_w"] = draw({H, cfg_.vocab}, 0.1);
  ps["dec.out_b"] = Tensor({1, cfg_.vocab});
}

Var Decoder::caption_logprob(Tape& tape, const ParameterStore& ps, Var cond, const std::vector<int>& ids) const {
  if (ids.size() < 2 || ids.front() != data::kBos || ids.back() != data::kEos)
    throw ArgumentError("caption must start with BOS and end with EOS");
  for (int id : ids)
    if (id < 0 || id >= cfg_.vocab) throw ArgumentError("token id " + std::to_string(id) + " outside vocabulary");
  if (cond.cols() != cfg_.cond_dim)
    throw ShapeError("decoder conditioning has " + std::to_string(cond.cols()) + " columns, expected " +
                     std::to_string(cfg_.cond_dim));
  const int m = cond.rows();
  Var cond_part = num::add(num::matmul(cond, tape.parameter(ps, "dec.w_cond")), tape.parameter(ps, "dec.b"));
  // embeddings of every input token at once: [n-1 x 4H] token contributions
  const std::vector<int> inputs(ids.begin(), ids.end() - 1);
  Var tok_part = num::matmul(num::gather_rows(tape.parameter(ps, "dec.embed"), inputs), tape.parameter(ps, "dec.w_tok"));
  Var w_h = tape.parameter(ps, "dec.w_h");
  Var out_w = tape.parameter(ps, "dec.out_w");
  Var out_b = tape.parameter(ps, "dec.out_b");

  LstmState st = lstm_zero_state(tape, m, cfg_.hidden);
  Var total;
  for (std::size_t s = 0; s + 1 < ids.size(); ++s) {
    const int r = static_cast<int>(s);
    st = lstm_step(num::add(cond_part, num::slice_rows(tok_part, r, r + 1)), st, w_h);
    Var logp = num::log_softmax_rows(num::add(num::matmul(st.h, out_w), out_b));
    Var picked = num::pick_cols(logp, std::vector<int>(m, ids[s + 1]));
    total = total.valid() ? num::add(total, picked) : picked;
  }
  return total;
}

std::vector<std::vector<double>> Decoder::step_distributions(const ParameterStore& ps, const Tensor& cond,
                                                             const std::vector<int>& ids) const {
  Tape tape(false);
  Var cond_part = num::add(num::matmul(tape.constant(cond), tape.parameter(ps, "dec.w_cond")), tape.parameter(ps, "dec.b"));
  Var w_h = tape.parameter(ps, "dec.w_h");
  LstmState st = lstm_zero_state(tape, 1, cfg_.hidden);
  std::vector<std::vector<double>> out;
  for (std::size_t s = 0; s + 1 < ids.size(); ++s) {
    Var tok = num::matmul(num::gather_rows(tape.parameter(ps, "dec.embed"), {ids[s]}), tape.parameter(ps, "dec.w_tok"));
    st = lstm_step(num::add(cond_part, tok), st, w_h);
    Var logits = num::add(num::matmul(st.h, tape.parameter(ps, "dec.out_w")), tape.parameter(ps, "dec.out_b"));
    out.push_back(softmax_double(logits.value().data(), cfg_.vocab, 1.0));
  }
  return out;
}

std::vector<int> Decoder::decode(const ParameterStore& ps, const Tensor& cond, const SampleConfig& cfg, Rng* rng) const {
  if (!(cfg.temperature > 0.0)) throw ArgumentError("temperature must be positive");
  Tape tape(false);
  Var cond_part = num::add(num::matmul(tape.constant(cond), tape.parameter(ps, "dec.w_cond")), tape.parameter(ps, "dec.b"));
  Var w_h = tape.parameter(ps, "dec.w_h");
  Var embed = tape.parameter(ps, "dec.embed");
  Var w_tok = tape.parameter(ps, "dec.w_tok");
  Var out_w = tape.parameter(ps, "dec.out_w");
  Var out_b = tape.parameter(ps, "dec.out_b");
  LstmState st = lstm_zero_state(tape, 1, cfg_.hidden);
  std::vector<int> ids{data::kBos};
  while (static_cast<int>(ids.size()) < cfg_.max_len - 1) {
    st = lstm_step(num::add(cond_part, num::matmul(num::gather_rows(embed, {ids.back()}), w_tok)), st, w_h);
    Var logits = num::add(num::matmul(st.h, out_w), out_b);
    const int next = pick_token(softmax_double(logits.value().data(), cfg_.vocab, cfg.temperature), cfg, rng);
    ids.push_back(next);
    if (next == data::kEos) return ids;
  }
  ids.push_back(data::kEos);
  return ids;
}

}  // namespace truce::inline TRUCE_PRECISION::seq
