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

#include <span>
#include <string>
#include <vector>

#include "truce/numerics/ops.hpp"
#include "truce/numerics/tape.hpp"
#include "truce/util/rng.hpp"

// Truth-conditional module networks: pattern (1-D conv stack), locate
// (mixture of fixed Gaussians over relative position) and one shared combine.
// A program z = (i, j) pairs pattern i with locate j; z = i * nL + j.
namespace truce::inline TRUCE_PRECISION::nmn {

using num::ParameterStore;
using num::Tape;
using num::Var;

struct ProgramSpaceConfig {
  int n_pattern = 6;
  int n_locate = 4;
  int components = 6;      // K Gaussians per locate module
  double width = 0.0;      // sigma in relative units; 0 means 1 / K
  int channels = 8;        // hidden channels of the pattern conv stack
  int kernel = 5;
  int embed_dim = 18;      // per module; program embeddings are twice this
  double lambda = 10.0;    // prior temperature
  double input_scale = 0.01;
};

class ProgramSpace {
 public:
  explicit ProgramSpace(ProgramSpaceConfig cfg = {});

  const ProgramSpaceConfig& config() const { return cfg_; }
  int size() const { return cfg_.n_pattern * cfg_.n_locate; }
  int program(int pattern, int locate) const;
  int pattern_of(int z) const { return z / cfg_.n_locate; }
  int locate_of(int z) const { return z % cfg_.n_locate; }
  int embedding_dim() const { return 2 * cfg_.embed_dim; }
  double sigma() const;

  // Fills ps with freshly initialized module parameters (prefix "nmn.").
  void init_params(ParameterStore& ps, Rng& rng) const;

  // Series as a [1 x T] constant, already scaled for the pattern modules.
  Var input(Tape& tape, std::span<const double> series) const;

  Var pattern_forward(Tape& tape, const ParameterStore& ps, int i, Var x) const;   // [1 x T] in (0,1)
  Var locate_forward(Tape& tape, const ParameterStore& ps, int j, int T) const;    // [1 x T] in (0,1]
  Var combine_forward(Tape& tape, const ParameterStore& ps, Var a, Var m) const;   // [1 x 1]

  // Truth scores of every program, [1 x |Z|]; the same arithmetic as
  // combine_forward(pattern_forward(i), locate_forward(j)) for each z.
  Var scores(Tape& tape, const ParameterStore& ps, Var x) const;
  // log p(z | x) = log_softmax(lambda * scores), [1 x |Z|].
  Var log_prior(Var scores) const;
  // [|Z| x 2 * embed_dim]; row z = concat(pattern_emb[i], locate_emb[j]).
  Var embeddings(Tape& tape, const ParameterStore& ps) const;

  // Fixed Gaussian bumps exp(-(t_rel - mu_k)^2 / (2 sigma^2)), [K x T].
  num::Tensor gaussian_basis(int T) const;

  static std::string pattern_name(int i, const char* what);
  static std::string locate_name(int j);

 private:
  ProgramSpaceConfig cfg_;
};

// Single-program score outside any training graph.
double score_program(const ProgramSpace& space, const ParameterStore& ps, int z, std::span<const double> series);
std::vector<double> prior(const ProgramSpace& space, const ParameterStore& ps, std::span<const double> series);

}  // namespace truce::nmn
