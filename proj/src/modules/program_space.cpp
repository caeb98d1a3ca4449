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

#include "truce/modules/program_space.hpp"

#include <algorithm>
#include <cmath>

#include "truce/util/error.hpp"

namespace truce::inline TRUCE_PRECISION::nmn {

using num::real;
using num::Tensor;

namespace {

Tensor uniform_tensor(num::Shape shape, Rng& rng, double bound) {
  Tensor t(std::move(shape));
  for (real& v : t.storage()) v = static_cast<real>(rng.uniform(-bound, bound));
  return t;
}

}  // namespace

ProgramSpace::ProgramSpace(ProgramSpaceConfig cfg) : cfg_(cfg) {
  if (cfg_.n_pattern < 1 || cfg_.n_locate < 1 || cfg_.components < 1 || cfg_.channels < 1 || cfg_.embed_dim < 1)
    throw ArgumentError("program space: module counts and sizes must be positive");
  if (cfg_.kernel < 1 || cfg_.kernel % 2 == 0) throw ArgumentError("program space: kernel width must be odd");
  if (!(cfg_.lambda > 0.0)) throw ArgumentError("program space: lambda must be positive");
}

int ProgramSpace::program(int pattern, int locate) const {
  if (pattern < 0 || pattern >= cfg_.n_pattern || locate < 0 || locate >= cfg_.n_locate)
    throw ArgumentError("program (" + std::to_string(pattern) + ", " + std::to_string(locate) + ") out of range");
  return pattern * cfg_.n_locate + locate;
}

double ProgramSpace::sigma() const { return cfg_.width > 0.0 ? cfg_.width : 1.0 / cfg_.components; }

std::string ProgramSpace::pattern_name(int i, const char* what) {
  return "nmn.pattern" + std::to_string(i) + "." + what;
}

std::string ProgramSpace::locate_name(int j) { return "nmn.locate" + std::to_string(j) + ".logits"; }

void ProgramSpace::init_params(ParameterStore& ps, Rng& rng) const {
  const int C = cfg_.channels, K = cfg_.kernel;
  for (int i = 0; i < cfg_.n_pattern; ++i) {
    ps[pattern_name(i, "w1")] = uniform_tensor({C, 1, K}, rng, 0.1);
    ps[pattern_name(i, "b1")] = Tensor({1, C});
    ps[pattern_name(i, "w2")] = uniform_tensor({1, C, K}, rng, 0.1);
    ps[pattern_name(i, "b2")] = Tensor({1, 1});
  }
  for (int j = 0; j < cfg_.n_locate; ++j) ps[locate_name(j)] = uniform_tensor({1, cfg_.components}, rng, 0.1);
  ps["nmn.combine.w"] = Tensor::scalar(1);
  ps["nmn.combine.b"] = Tensor::scalar(-1);
  ps["nmn.pattern_emb"] = uniform_tensor({cfg_.n_pattern, cfg_.embed_dim}, rng, 0.1);
  ps["nmn.locate_emb"] = uniform_tensor({cfg_.n_locate, cfg_.embed_dim}, rng, 0.1);
}

Var ProgramSpace::input(Tape& tape, std::span<const double> series) const {
  Tensor x({1, static_cast<int>(series.size())});
  for (std::size_t t = 0; t < series.size(); ++t) x[t] = static_cast<real>(series[t] * cfg_.input_scale);
  return tape.constant(std::move(x));
}

Var ProgramSpace::pattern_forward(Tape& tape, const ParameterStore& ps, int i, Var x) const {
  if (i < 0 || i >= cfg_.n_pattern) throw ArgumentError("pattern index " + std::to_string(i) + " out of range");
  if (x.cols() < cfg_.kernel)
    throw ShapeError("pattern module needs T >= " + std::to_string(cfg_.kernel) + ", got " + std::to_string(x.cols()));
  Var h = num::relu(num::conv1d(x, tape.parameter(ps, pattern_name(i, "w1")), tape.parameter(ps, pattern_name(i, "b1"))));
  return num::sigmoid(num::conv1d(h, tape.parameter(ps, pattern_name(i, "w2")), tape.parameter(ps, pattern_name(i, "b2"))));
}

Tensor ProgramSpace::gaussian_basis(int T) const {
  if (T < 1) throw ArgumentError("locate module needs T >= 1");
  const int K = cfg_.components;
  const double s = sigma();
  Tensor g({K, T});
  for (int k = 0; k < K; ++k) {
    const double mu = (k + 0.5) / K;
    for (int t = 0; t < T; ++t) {
      const double d = (t + 0.5) / T - mu;
      g.at(k, t) = static_cast<real>(std::exp(-d * d / (2.0 * s * s)));
    }
  }
  return g;
}

Var ProgramSpace::locate_forward(Tape& tape, const ParameterStore& ps, int j, int T) const {
  if (j < 0 || j >= cfg_.n_locate) throw ArgumentError("locate index " + std::to_string(j) + " out of range");
  Var w = num::softmax_rows(tape.parameter(ps, locate_name(j)));
  return num::matmul(w, tape.constant(gaussian_basis(T)));
}

Var ProgramSpace::combine_forward(Tape& tape, const ParameterStore& ps, Var a, Var m) const {
  if (a.shape() != m.shape() || a.rows() != 1)
    throw ShapeError("combine: pattern " + num::shape_str(a.shape()) + " and locate " + num::shape_str(m.shape()) +
                     " must be equal [1 x T] rows");
  const int T = a.cols();
  Var pooled = num::scale(num::matmul(a, num::transpose(m)), static_cast<real>(1.0 / T));
  Var s = num::add(num::mul(pooled, tape.parameter(ps, "nmn.combine.w")), tape.parameter(ps, "nmn.combine.b"));
  return num::sigmoid(s);
}

Var ProgramSpace::scores(Tape& tape, const ParameterStore& ps, Var x) const {
  const int T = x.cols();
  std::vector<Var> a, m;
  for (int i = 0; i < cfg_.n_pattern; ++i) a.push_back(pattern_forward(tape, ps, i, x));
  for (int j = 0; j < cfg_.n_locate; ++j) m.push_back(locate_forward(tape, ps, j, T));
  // [nP x T] * [T x nL]: entry (i, j) is the pooled product of program (i, j)
  Var pooled = num::scale(num::matmul(num::concat_rows(a), num::transpose(num::concat_rows(m))),
                          static_cast<real>(1.0 / T));
  pooled = num::reshape(pooled, {1, size()});
  Var s = num::add(num::mul(pooled, tape.parameter(ps, "nmn.combine.w")), tape.parameter(ps, "nmn.combine.b"));
  return num::sigmoid(s);
}

Var ProgramSpace::log_prior(Var scores) const {
  return num::log_softmax_rows(num::scale(scores, static_cast<real>(cfg_.lambda)));
}

Var ProgramSpace::embeddings(Tape& tape, const ParameterStore& ps) const {
  std::vector<int> pat(size()), loc(size());
  for (int z = 0; z < size(); ++z) {
    pat[z] = pattern_of(z);
    loc[z] = locate_of(z);
  }
  return num::concat_cols({num::gather_rows(tape.parameter(ps, "nmn.pattern_emb"), pat),
                           num::gather_rows(tape.parameter(ps, "nmn.locate_emb"), loc)});
}

double score_program(const ProgramSpace& space, const ParameterStore& ps, int z, std::span<const double> series) {
  if (z < 0 || z >= space.size()) throw ArgumentError("program id " + std::to_string(z) + " out of range");
  Tape tape(false);
  Var x = space.input(tape, series);
  Var a = space.pattern_forward(tape, ps, space.pattern_of(z), x);
  Var m = space.locate_forward(tape, ps, space.locate_of(z), x.cols());
  return space.combine_forward(tape, ps, a, m).value().item();
}

std::vector<double> prior(const ProgramSpace& space, const ParameterStore& ps, std::span<const double> series) {
  Tape tape(false);
  const Tensor s = space.scores(tape, ps, space.input(tape, series)).value();
  // softmax(lambda * s) in double, so the vector sums to 1 to double precision
  const double lam = space.config().lambda;
  double mx = -INFINITY;
  for (real v : s.storage()) mx = std::max(mx, lam * v);
  std::vector<double> out(space.size());
  double z = 0.0;
  for (int k = 0; k < space.size(); ++k) z += out[k] = std::exp(lam * s[k] - mx);
  for (double& v : out) v /= z;
  return out;
}

}  // namespace truce::inline TRUCE_PRECISION::nmn
