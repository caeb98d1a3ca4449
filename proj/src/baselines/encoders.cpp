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

#include "truce/baselines/encoders.hpp"

#include <cmath>
#include <numbers>

#include "truce/seq/lstm.hpp"
#include "truce/util/error.hpp"

namespace truce::inline TRUCE_PRECISION::base {

using num::real;
using num::Tensor;

std::string_view to_string(EncoderKind k) {
  switch (k) {
    case EncoderKind::fc: return "fc";
    case EncoderKind::lstm: return "lstm";
    case EncoderKind::conv: return "conv";
    case EncoderKind::fft: return "fft";
  }
  return "?";
}

EncoderKind parse_encoder_kind(std::string_view s) {
  if (s == "fc") return EncoderKind::fc;
  if (s == "lstm") return EncoderKind::lstm;
  if (s == "conv") return EncoderKind::conv;
  if (s == "fft") return EncoderKind::fft;
  throw ArgumentError("unknown encoder '" + std::string(s) + "'");
}

std::vector<double> dft_features(std::span<const double> x) {
  const int T = static_cast<int>(x.size());
  const int F = T / 2 + 1;
  std::vector<double> out(2 * F);
  for (int k = 0; k < F; ++k) {
    double re = 0.0, im = 0.0;
    for (int t = 0; t < T; ++t) {
      // reduce k*t mod T first so the angle stays small and exact
      const double ang = 2.0 * std::numbers::pi * ((static_cast<long>(k) * t) % T) / T;
      re += x[t] * std::cos(ang);
      im -= x[t] * std::sin(ang);
    }
    out[k] = re;
    out[F + k] = im;
  }
  return out;
}

std::vector<double> adapt_length(std::span<const double> series, int T) {
  const int n = static_cast<int>(series.size());
  if (n == T) return {series.begin(), series.end()};
  if (n == 2 * T) {
    std::vector<double> out(T);
    for (int t = 0; t < T; ++t) out[t] = series[2 * t];
    return out;
  }
  throw ShapeError("series of length " + std::to_string(n) + " cannot be adapted to " + std::to_string(T));
}

Encoder::Encoder(EncoderConfig cfg, std::string prefix) : cfg_(cfg), prefix_(std::move(prefix)) {
  if (cfg_.out < 1 || cfg_.series_length < 1) throw ArgumentError("encoder: sizes must be positive");
  if (cfg_.conv_kernel % 2 == 0) throw ArgumentError("encoder: conv kernel must be odd");
}

void Encoder::init_params(ParameterStore& ps, Rng& rng) const {
  auto draw = [&](num::Shape shape, double bound) {
    Tensor t(std::move(shape));
    for (real& v : t.storage()) v = static_cast<real>(rng.uniform(-bound, bound));
    return t;
  };
  const int O = cfg_.out;
  switch (cfg_.kind) {
    case EncoderKind::fc:
      ps[name("w1")] = draw({cfg_.series_length, cfg_.fc_hidden}, 0.3);
      ps[name("b1")] = Tensor({1, cfg_.fc_hidden});
      ps[name("w2")] = draw({cfg_.fc_hidden, O}, 0.3);
      ps[name("b2")] = Tensor({1, O});
      break;
    case EncoderKind::lstm:
      seq::lstm_init(ps, name("lstm"), cfg_.lstm_hidden, cfg_.lstm_hidden, rng, 0.3);
      ps[name("proj_w")] = draw({cfg_.lstm_hidden, O}, 0.3);
      ps[name("proj_b")] = Tensor({1, O});
      break;
    case EncoderKind::conv: {
      const int C = cfg_.conv_channels, K = cfg_.conv_kernel;
      ps[name("w1")] = draw({C, 1, K}, 0.3);
      ps[name("b1")] = Tensor({1, C});
      ps[name("w2")] = draw({C, C, K}, 0.3);
      ps[name("b2")] = Tensor({1, C});
      ps[name("proj_w")] = draw({C, O}, 0.3);
      ps[name("proj_b")] = Tensor({1, O});
      break;
    }
    case EncoderKind::fft: {
      const int F = 2 * (cfg_.series_length / 2 + 1);
      ps[name("w1")] = draw({F, cfg_.fft_hidden}, 0.3);
      ps[name("b1")] = Tensor({1, cfg_.fft_hidden});
      ps[name("w2")] = draw({cfg_.fft_hidden, O}, 0.3);
      ps[name("b2")] = Tensor({1, O});
      break;
    }
  }
}

Var Encoder::encode(Tape& tape, const ParameterStore& ps, std::span<const double> series) const {
  const int T = static_cast<int>(series.size());
  if (fixed_width() && T != cfg_.series_length)
    throw ShapeError(std::string(to_string(cfg_.kind)) + " encoder expects T=" + std::to_string(cfg_.series_length) +
                     ", got " + std::to_string(T));
  auto row = [&](const std::vector<double>& v) {
    Tensor t({1, static_cast<int>(v.size())});
    for (std::size_t i = 0; i < v.size(); ++i) t[i] = static_cast<real>(v[i] * cfg_.input_scale);
    return tape.constant(std::move(t));
  };
  const std::vector<double> xs(series.begin(), series.end());
  auto mlp = [&](Var in) {
    Var h = num::relu(num::add(num::matmul(in, tape.parameter(ps, name("w1"))), tape.parameter(ps, name("b1"))));
    return num::add(num::matmul(h, tape.parameter(ps, name("w2"))), tape.parameter(ps, name("b2")));
  };
  switch (cfg_.kind) {
    case EncoderKind::fc: return mlp(row(xs));
    case EncoderKind::fft: return mlp(row(dft_features(xs)));
    case EncoderKind::lstm: {
      const int H = cfg_.lstm_hidden;
      // step t sees x_t repeated H times
      Tensor steps({T, H});
      for (int t = 0; t < T; ++t)
        for (int j = 0; j < H; ++j) steps.at(t, j) = static_cast<real>(xs[t] * cfg_.input_scale);
      Var xw = num::add(num::matmul(tape.constant(std::move(steps)), tape.parameter(ps, name("lstm.w_x"))),
                        tape.parameter(ps, name("lstm.b")));
      Var w_h = tape.parameter(ps, name("lstm.w_h"));
      seq::LstmState st = seq::lstm_zero_state(tape, 1, H);
      for (int t = 0; t < T; ++t) st = seq::lstm_step(num::slice_rows(xw, t, t + 1), st, w_h);
      return num::add(num::matmul(st.h, tape.parameter(ps, name("proj_w"))), tape.parameter(ps, name("proj_b")));
    }
    case EncoderKind::conv: {
      if (T < cfg_.conv_kernel) throw ShapeError("conv encoder needs T >= kernel width");
      Var h = num::relu(num::conv1d(row(xs), tape.parameter(ps, name("w1")), tape.parameter(ps, name("b1"))));
      h = num::relu(num::conv1d(h, tape.parameter(ps, name("w2")), tape.parameter(ps, name("b2"))));
      Var pooled = num::transpose(num::reduce_mean(h, 1));  // [1 x C]
      return num::add(num::matmul(pooled, tape.parameter(ps, name("proj_w"))), tape.parameter(ps, name("proj_b")));
    }
  }
  throw ArgumentError("unknown encoder kind");
}

}  // namespace truce::inline TRUCE_PRECISION::base
