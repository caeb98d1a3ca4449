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

#include "network_gradients.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <limits>

#include "gradcheck.hpp"
#include "truce/baselines/encoders.hpp"
#include "truce/data/vocab.hpp"
#include "truce/modules/program_space.hpp"
#include "truce/seq/decoder.hpp"
#include "truce/seq/inference_net.hpp"
#include "truce/train/objective.hpp"
#include "truce/util/error.hpp"

#if !defined(TRUCE_REAL_DOUBLE)
#error "network gradient checks need the double-precision build"
#endif

namespace truce::gradsuite {

using namespace truce::num;

namespace {

constexpr double kStep = 1e-3;
constexpr double kTol = 1e-3;
// Closest a relu input may sit to zero. A central difference of step h moves
// a first-layer pre-activation by at most h times an input in [0, 1].
constexpr double kKinkMargin = 2e-3;
constexpr int kMaxDraws = 1000;

std::vector<double> random_series(Rng& rng, int T) {
  std::vector<double> x(T);
  for (double& v : x) v = rng.uniform(0.0, 100.0);
  return x;
}

std::vector<int> random_caption(Rng& rng, int vocab) {
  std::vector<int> ids{data::kBos};
  const int n = rng.uniform_int(1, 6);
  for (int i = 0; i < n; ++i) ids.push_back(rng.uniform_int(data::kUnk + 1, vocab - 1));
  ids.push_back(data::kEos);
  return ids;
}

double relu_margin(const Tape& tape) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t id = 0; id < tape.size(); ++id) {
    if (std::strcmp(tape.op_name(static_cast<int>(id)), "relu") != 0) continue;
    for (real v : tape.value(tape.input(static_cast<int>(id), 0)).storage()) m = std::min(m, std::abs(double(v)));
  }
  return m;
}

// One instance: parameters, a loss builder and the parameter prefix checked.
struct Instance {
  ParameterStore ps;
  testing::LossBuilder build;
  std::string prefix;
};
using Maker = std::function<Instance(Rng&)>;

const nmn::ProgramSpace& space() {
  static const nmn::ProgramSpace s;
  return s;
}

Instance pattern_instance(Rng& rng) {
  Instance in;
  space().init_params(in.ps, rng);
  const int i = rng.uniform_int(0, space().config().n_pattern - 1);
  // wider than the training init, so fewer pre-activations sit near the kink
  for (const char* what : {"w1", "b1", "w2", "b2"}) {
    Tensor& t = in.ps.at(nmn::ProgramSpace::pattern_name(i, what));
    t = testing::random_tensor(rng, t.shape(), -0.5f, 0.5f);
  }
  const auto x = random_series(rng, rng.bernoulli(0.5) ? 12 : 24);
  const std::uint64_t proj = rng.next();
  in.build = [=](Tape& t, const ParameterStore& p) {
    return testing::project(space().pattern_forward(t, p, i, space().input(t, x)), proj);
  };
  in.prefix = "nmn.pattern" + std::to_string(i) + ".";
  return in;
}

Instance locate_instance(Rng& rng) {
  Instance in;
  space().init_params(in.ps, rng);
  const int j = rng.uniform_int(0, space().config().n_locate - 1);
  for (real& v : in.ps.at(nmn::ProgramSpace::locate_name(j)).storage()) v = rng.uniformf(-2.0f, 2.0f);
  const int T = rng.bernoulli(0.5) ? 12 : 24;
  const std::uint64_t proj = rng.next();
  in.build = [=](Tape& t, const ParameterStore& p) { return testing::project(space().locate_forward(t, p, j, T), proj); };
  in.prefix = nmn::ProgramSpace::locate_name(j);
  return in;
}

Instance combine_instance(Rng& rng) {
  Instance in;
  space().init_params(in.ps, rng);
  in.ps.at("nmn.combine.w") = testing::random_tensor(rng, {1, 1}, 0.5f, 2.0f);
  in.ps.at("nmn.combine.b") = testing::random_tensor(rng, {1, 1});
  const Tensor a = testing::random_tensor(rng, {1, 12}, 0.0f, 1.0f);
  const Tensor m = testing::random_tensor(rng, {1, 12}, 0.01f, 1.0f);
  in.build = [=](Tape& t, const ParameterStore& p) {
    return space().combine_forward(t, p, t.constant(a), t.constant(m));
  };
  in.prefix = "nmn.combine.";
  return in;
}

// Small widths: the code path is size-independent and FD cost is quadratic.
constexpr int kVocab = 12;

Instance decoder_instance(Rng& rng) {
  static const seq::Decoder dec(seq::DecoderConfig{kVocab, 8, 8, 6, 16});
  Instance in;
  dec.init_params(in.ps, rng);
  const int rows = rng.uniform_int(1, 3);
  in.ps["cond"] = testing::random_tensor(rng, {rows, 6});
  const auto ids = random_caption(rng, kVocab);
  const std::uint64_t proj = rng.next();
  in.build = [=](Tape& t, const ParameterStore& p) {
    return testing::project(dec.caption_logprob(t, p, t.parameter(p, "cond"), ids), proj);
  };
  return in;
}

Instance inference_instance(Rng& rng) {
  static const seq::InferenceNet inf(seq::InferenceConfig{kVocab, 8, 8, 24});
  Instance in;
  inf.init_params(in.ps, rng);
  // ragged batch, so the masked path is exercised
  const std::vector<std::vector<int>> caps{random_caption(rng, kVocab), random_caption(rng, kVocab),
                                           random_caption(rng, kVocab)};
  const std::uint64_t proj = rng.next();
  in.build = [=](Tape& t, const ParameterStore& p) { return testing::project(inf.log_posterior(t, p, caps), proj); };
  return in;
}

Maker encoder_maker(base::EncoderKind kind) {
  return [kind](Rng& rng) {
    base::EncoderConfig cfg;
    cfg.kind = kind;
    const base::Encoder enc(cfg, "enc");
    Instance in;
    enc.init_params(in.ps, rng);
    for (auto& [name, t] : in.ps)  // nonzero biases
      if (name.back() == 'b' || name.find("_b") != std::string::npos)
        t = testing::random_tensor(rng, t.shape(), -0.1f, 0.1f);
    const int T = enc.fixed_width() ? 12 : (rng.bernoulli(0.5) ? 12 : 24);
    const auto x = random_series(rng, T);
    const std::uint64_t proj = rng.next();
    in.build = [=](Tape& t, const ParameterStore& p) { return testing::project(enc.encode(t, p, x), proj); };
    return in;
  };
}

Instance objective_instance(Rng& rng) {
  Instance in;
  const int Z = 24;
  in.ps["prior"] = testing::random_tensor(rng, {1, Z}, -3.0f, 3.0f);
  in.ps["q"] = testing::random_tensor(rng, {1, Z}, -3.0f, 3.0f);
  in.ps["lp"] = testing::random_tensor(rng, {1, Z}, -20.0f, -1.0f);
  const int label = rng.uniform_int(0, Z - 1);
  const double w = rng.uniform(0.0, 2.0);
  in.build = [=](Tape& t, const ParameterStore& p) {
    Var lprior = log_softmax_rows(t.parameter(p, "prior"));
    Var lq = log_softmax_rows(t.parameter(p, "q"));
    Var lp = t.parameter(p, "lp");
    const train::ElboTerms e = train::elbo(lprior, lp, lq);
    Var loss = add(scale(e.elbo, -1), scale(train::aux_loss(lq, label), static_cast<real>(w)));
    return add(loss, scale(train::marginal_loglik(lprior, lp), 0.5));
  };
  return in;
}

Maker maker_for(const std::string& network) {
  if (network == "pattern") return pattern_instance;
  if (network == "locate") return locate_instance;
  if (network == "combine") return combine_instance;
  if (network == "decoder") return decoder_instance;
  if (network == "inference") return inference_instance;
  if (network == "objective") return objective_instance;
  if (network.rfind("encoder-", 0) == 0) return encoder_maker(base::parse_encoder_kind(network.substr(8)));
  throw ArgumentError("unknown network '" + network + "'");
}

}  // namespace

std::vector<std::string> network_names() {
  return {"pattern",     "locate",       "combine",      "decoder",     "inference",
          "encoder-fc",  "encoder-lstm", "encoder-conv", "encoder-fft", "objective"};
}

NetworkResult check_network(const std::string& network, int instances, std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  const Maker make = maker_for(network);
  Rng rng(Rng::derive(seed, network));
  NetworkResult r;
  r.network = network;
  for (int k = 0; k < instances; ++k) {
    Instance in = make(rng);
    for (int draws = 1;; ++draws) {
      Tape probe(false);
      in.build(probe, in.ps);
      if (relu_margin(probe) >= kKinkMargin) break;
      if (draws == kMaxDraws) throw Error(network + ": no instance clear of the relu kink");
      ++r.resampled;
      in = make(rng);
    }
    const auto res = testing::grad_check(in.ps, in.build, kStep, kTol, 1e-2, in.prefix);
    ++r.instances;
    r.coordinates += res.checked;
    if (res.failed > 0) ++r.failed_instances;
    if (res.max_rel >= r.max_rel) {
      r.max_rel = res.max_rel;
      r.worst = res.worst;
    }
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace truce::gradsuite
