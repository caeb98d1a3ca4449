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
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "truce/data/dataset.hpp"
#include "truce/data/lexicon.hpp"
#include "truce/train/trainer.hpp"

// Experiment drivers over a trained model: automatic metrics, oracle
// correctness, coverage-correctness curves, word-association tables, and
// the compositional held-out test. `threads` bounds the per-instance workers;
// results do not depend on it.
namespace truce::inline TRUCE_PRECISION::eval {

using Instances = std::vector<const data::Instance*>;

struct InstanceRecord {
  std::string id;
  std::string caption;
  int program = -1;     // program models
  double score = 0.0;   // s_z(x) of that program
  std::optional<bool> correct;
};

struct MetricReport {
  int instances = 0;
  double bleu3 = 0.0;
  double bleu4 = 0.0;
  double rouge_l = 0.0;
  double cider = 0.0;  // times 10
  double perplexity = 0.0;
  std::optional<double> correctness;  // SYNTH only: needs pattern metadata
  std::vector<InstanceRecord> records;
};

nlohmann::json to_json(const MetricReport& r);

// Oracle reading equals the instance's pattern class.
bool oracle_correct(const data::HeuristicLexicon& lex, const std::string& caption, const data::PatternMeta& meta);

// exp(-sum log p(y | x) / number of predicted tokens), marginal over programs.
double perplexity(const train::TrainedModel& tm, const Instances& instances, unsigned threads = 1);

// Greedy captions scored against every instance's references.
MetricReport evaluate_metrics(const train::TrainedModel& tm, const Instances& instances, unsigned threads = 1);

// Fraction of greedy captions the oracle reads as the true class. Throws
// ArgumentError when an instance has no pattern metadata.
double correctness(const train::TrainedModel& tm, const Instances& instances, unsigned threads = 1);

struct CoveragePoint {
  double top_p = 0.0;
  std::optional<double> correctness;  // over all L x N samples
  double coverage = 0.0;              // fraction of references whose class some sample matches
  int samples = 0;
};

inline const std::vector<double> kDefaultTopP{0.3, 0.5, 0.7, 0.9, 1.0};

// L nucleus samples per instance and top_p. Program models sample the
// program and decode it greedily; baselines sample tokens. Every top_p uses
// the same per-instance random stream, so its first samples are shared.
std::vector<CoveragePoint> coverage_curve(const train::TrainedModel& tm, const Instances& instances, int L,
                                          const std::vector<double>& top_ps, std::uint64_t seed, unsigned threads = 1);

enum class WordSource { prior, inference };

struct ModuleWords {
  std::string module;
  std::vector<std::pair<std::string, int>> words;  // most frequent first
};

struct WordTables {
  std::vector<ModuleWords> pattern;
  std::vector<ModuleWords> locate;
};

// Caption words (minus stop words and punctuation) attached to both modules
// of each argmax program: from p(z | x) per instance, or from q(z | y) per
// caption. Program models only.
WordTables module_word_table(const train::TrainedModel& tm, const Instances& instances, WordSource source,
                             const std::vector<std::string>& stopwords, int top_k = 6);

nlohmann::json to_json(const WordTables& t);

struct CompositionResult {
  int instances = 0;
  double accuracy = 0.0;
  double chance = 0.0;
  std::map<std::string, double> per_class;
};

// Accuracy of argmax_z s_z(x) against the program of the anchored trend and
// location modules. Throws ArgumentError for an unanchored model.
CompositionResult composition_eval(const train::TrainedModel& tm, const Instances& instances);

nlohmann::json to_json(const CompositionResult& r);

// Coverage-correctness scatter, one polyline per system. `provenance` is
// embedded as an XML comment.
void write_coverage_svg(const std::filesystem::path& path,
                        const std::vector<std::pair<std::string, std::vector<CoveragePoint>>>& systems,
                        const std::string& provenance = "");

}  // namespace truce::inline TRUCE_PRECISION::eval
