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

#include <vector>

#include "truce/seq/lstm.hpp"

namespace truce::inline TRUCE_PRECISION::seq {

struct DecoderConfig {
  int vocab = 0;
  int embed = 64;
  int hidden = 64;
  int cond_dim = 36;  // width of the conditioning vector (program embedding)
  int max_len = 16;   // ids including BOS and EOS
};

enum class SampleMode { greedy, nucleus };

struct SampleConfig {
  SampleMode mode = SampleMode::greedy;
  double top_p = 1.0;
  double temperature = 1.0;
};

// Index drawn from a next-token distribution: argmax (lowest id on ties) for
// greedy; otherwise sorted by decreasing probability (ties by id), cut to the
// shortest prefix holding at least top_p of the mass, renormalized, sampled.
int pick_token(const std::vector<double>& probs, const SampleConfig& cfg, Rng* rng);

// Single-layer LSTM language model whose per-step input is
// concat(previous-token embedding, conditioning vector). The input weight is
// stored as two blocks, w_tok and w_cond, which is the same linear map as one
// weight over the concatenation.
class Decoder {
 public:
  explicit Decoder(DecoderConfig cfg);
  const DecoderConfig& config() const { return cfg_; }

  void init_params(ParameterStore& ps, Rng& rng) const;  // prefix "dec."

  // log p(ids | cond_r) for every row r of cond [m x cond_dim] -> [m x 1].
  // ids starts with BOS and ends with EOS.
  Var caption_logprob(Tape& tape, const ParameterStore& ps, Var cond, const std::vector<int>& ids) const;

  // Next-token distributions after each prefix ids[0..s], s < ids.size() - 1,
  // for a single conditioning row; used by tests and perplexity diagnostics.
  std::vector<std::vector<double>> step_distributions(const ParameterStore& ps, const num::Tensor& cond,
                                                      const std::vector<int>& ids) const;

  // BOS, generated ids, EOS; at most max_len ids. rng may be null for greedy.
  std::vector<int> decode(const ParameterStore& ps, const num::Tensor& cond, const SampleConfig& cfg, Rng* rng) const;

 private:
  DecoderConfig cfg_;
};

}  // namespace truce::inline TRUCE_PRECISION::seq
