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

struct InferenceConfig {
  int vocab = 0;
  int embed = 64;
  int hidden = 64;  // per direction
  int programs = 24;
};

// q(z | y): bidirectional LSTM over the caption ids, final forward and
// backward states concatenated, then a linear layer and softmax over programs.
class InferenceNet {
 public:
  explicit InferenceNet(InferenceConfig cfg);
  const InferenceConfig& config() const { return cfg_; }

  void init_params(ParameterStore& ps, Rng& rng) const;  // prefix "inf."

  // Log-probabilities [B x programs] for a batch of captions of any lengths;
  // shorter captions are padded and masked.
  Var log_posterior(Tape& tape, const ParameterStore& ps, const std::vector<std::vector<int>>& captions) const;

  std::vector<double> posterior(const ParameterStore& ps, const std::vector<int>& caption) const;

 private:
  InferenceConfig cfg_;
};

}  // namespace truce::inline TRUCE_PRECISION::seq
