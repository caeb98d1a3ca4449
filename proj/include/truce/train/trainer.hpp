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

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "truce/data/dataset.hpp"
#include "truce/data/lexicon.hpp"
#include "truce/data/vocab.hpp"
#include "truce/train/checkpoint.hpp"
#include "truce/train/model.hpp"

namespace truce::inline TRUCE_PRECISION::train {

struct TrainConfig {
  int epochs = 30;
  int batch_size = 32;
  double learning_rate = 3e-3;
  double w_aux = 1.0;  // heuristic-label weight (classification weight for baselines)
  // Optional sweeps; the run with the best dev Bleu-4 is kept. Empty means
  // the single value from the model config / w_aux.
  std::vector<double> lambda_sweep;
  std::vector<double> w_aux_sweep;
  bool direct_conditioning = false;  // truce-d
  bool no_inference_net = false;     // optimize log p(y | x) directly
  bool no_heuristic = false;         // w_aux = 0
  int patience = 10;                 // epochs without a dev Bleu-4 gain before stopping
  int probe_size = 16;               // train pairs checked for the variational identities each epoch
  int dev_limit = 0;                 // dev instances decoded for model selection (0 = all)
  std::uint64_t seed = 1;
};

nlohmann::json to_json(const TrainConfig& c);
// Missing keys keep their defaults; unknown keys are a SchemaError.
TrainConfig train_config_from_json(const nlohmann::json& j);

// Worst cases of the identity checks over the probe pairs.
struct ProbeStats {
  int pairs = 0;
  double min_kl = std::numeric_limits<double>::infinity();
  double max_elbo_excess = -std::numeric_limits<double>::infinity();  // elbo - marginal
  double max_posterior_gap = 0.0;  // |elbo at the exact posterior - marginal|
  double max_prior_dev = 0.0;      // |sum_z p(z | x) - 1|
  double min_score = std::numeric_limits<double>::infinity();
  double max_score = -std::numeric_limits<double>::infinity();
  double min_locate = std::numeric_limits<double>::infinity();
  double max_locate = -std::numeric_limits<double>::infinity();

  void merge(const ProbeStats& o);
  bool holds() const;  // the tolerances of the identity contract
};

struct EpochRecord {
  int run = 0;
  int epoch = 0;
  double lambda = 0.0;
  double w_aux = 0.0;
  double objective = 0.0;  // mean per pair: elbo, or log p(y | x) without q
  std::optional<double> elbo;
  double kl = 0.0;
  double aux = 0.0;  // mean over tagged pairs
  double dev_objective = 0.0;  // the same objective on the dev pairs, after the epoch
  double dev_bleu4 = 0.0;
  bool best = false;
  std::optional<ProbeStats> probe;
};

nlohmann::json to_json(const EpochRecord& r);

struct TrainResult {
  Checkpoint checkpoint;  // best dev Bleu-4, or the last good parameters on divergence
  std::vector<EpochRecord> log;
  int best_run = 0;
  int best_epoch = 0;
  double best_dev_bleu4 = 0.0;
  bool diverged = false;
  std::string divergence;
  int train_pairs = 0;
  int tagged_pairs = 0;
  ProbeStats probe;  // over every epoch of every run
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Builds the vocabulary from the train captions, then trains one model per
// sweep point with Adam and dev Bleu-4 early stopping.
TrainResult train(ModelConfig model_cfg, const TrainConfig& cfg, const data::Dataset& ds,
                  const EpochCallback& on_epoch = {});

// Heuristic program label of a caption, if the lexicon tags it.
std::optional<int> heuristic_program(const data::HeuristicLexicon& lex, const nmn::ProgramSpace& space,
                                     const std::string& caption);

// A checkpoint ready for prediction.
struct TrainedModel {
  Model model;
  num::ParameterStore params;
  data::Vocabulary vocab;
  nlohmann::json manifest;

  static TrainedModel from_checkpoint(const Checkpoint& c);
  static TrainedModel load(const std::filesystem::path& path) { return from_checkpoint(load_checkpoint(path)); }
  // Module ids fixed by the heuristic labels (trained with w_aux > 0 on tagged captions).
  bool anchored() const;
  std::vector<std::string> words(const std::vector<int>& ids) const;
};

}  // namespace truce::inline TRUCE_PRECISION::train
