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

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "truce/baselines/encoders.hpp"
#include "truce/modules/program_space.hpp"
#include "truce/seq/decoder.hpp"
#include "truce/seq/inference_net.hpp"

namespace truce::inline TRUCE_PRECISION::train {

using num::ParameterStore;
using num::Tape;
using num::Var;

// truce: program prior + program-conditioned decoder (+ inference network);
// truce-d: the same, with a conv encoding of x concatenated to the program
// embedding; fc/lstm/conv/fft: encoder-decoder baselines.
enum class ModelKind { truce, truce_d, fc, lstm, conv, fft };
std::string_view to_string(ModelKind k);
ModelKind parse_model_kind(std::string_view s);
bool is_program_model(ModelKind k);

struct ModelConfig {
  ModelKind kind = ModelKind::truce;
  int vocab = 0;
  nmn::ProgramSpaceConfig space;
  int embed = 64;
  int hidden = 64;
  int max_len = 16;
  int inf_embed = 64;
  int inf_hidden = 64;
  base::EncoderConfig encoder;  // baselines; truce-d uses its conv settings
};

nlohmann::json to_json(const ModelConfig& c);
ModelConfig model_config_from_json(const nlohmann::json& j);

struct ObjectiveOptions {
  bool use_inference_net = true;  // false: optimize the marginal likelihood
  double w_aux = 1.0;             // heuristic-label weight (classification weight for baselines)
};

// Values of one (series, caption) training pair.
struct PairTerms {
  Var loss;      // -objective
  Var aux_loss;  // heuristic-label cross-entropy, unweighted; invalid without a label or when w_aux = 0
  double objective = 0.0;  // elbo (or marginal / caption log-likelihood without q)
  double recon = 0.0;
  double kl = 0.0;
  double aux = 0.0;
  // network outputs for the identity checks (program models only)
  std::vector<double> log_prior, caption_lp, log_q;
};

struct Caption {
  std::vector<int> ids;
  int program = -1;            // selected program (program models)
  double score = 0.0;          // its truth score s_z(x)
};

class Model {
 public:
  explicit Model(ModelConfig cfg);
  const ModelConfig& config() const { return cfg_; }
  ModelKind kind() const { return cfg_.kind; }
  bool program_model() const { return is_program_model(cfg_.kind); }
  const nmn::ProgramSpace& space() const { return space_; }
  const seq::Decoder& decoder() const { return decoder_; }
  const seq::InferenceNet& inference() const { return inference_; }
  int programs() const { return space_.size(); }

  void init_params(ParameterStore& ps, Rng& rng) const;

  // Terms for one pair. `label` is the heuristic program id, if any.
  PairTerms pair_terms(Tape& tape, const ParameterStore& ps, std::span<const double> series,
                       const std::vector<int>& ids, std::optional<int> label, const ObjectiveOptions& opt) const;

  // Per-program conditioning rows [|Z| x C] (program models) or [1 x C].
  Var conditioning(Tape& tape, const ParameterStore& ps, std::span<const double> series) const;
  // Truth scores [1 x |Z|] (program models only).
  Var scores(Tape& tape, const ParameterStore& ps, std::span<const double> series) const;

  // Greedy caption; program models pick argmax_z p(z | x).
  Caption greedy(const ParameterStore& ps, std::span<const double> series) const;
  // One sample: program models draw z by nucleus sampling over p(z | x) and
  // decode greedily; baselines sample tokens by nucleus.
  Caption sample(const ParameterStore& ps, std::span<const double> series, double top_p, Rng& rng) const;
  // log p(y | x), marginalized over programs for program models.
  double loglik(const ParameterStore& ps, std::span<const double> series, const std::vector<int>& ids) const;

  std::vector<double> prior(const ParameterStore& ps, std::span<const double> series) const;
  // argmax_z q(z | y).
  int infer_program(const ParameterStore& ps, const std::vector<int>& ids) const;

  // Parameters used at prediction time: excludes the inference network and
  // the baselines' classification head.
  std::size_t prediction_parameters(const ParameterStore& ps) const;

  // Series as seen by the encoder: fixed-width baselines subsample a 2T input.
  std::vector<double> prepare(std::span<const double> series) const;

 private:
  ModelConfig cfg_;
  nmn::ProgramSpace space_;
  seq::Decoder decoder_;
  seq::InferenceNet inference_;
  base::Encoder encoder_;
};

}  // namespace truce::inline TRUCE_PRECISION::train
