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

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "truce/baselines/near_nbr.hpp"
#include "truce/data/dataset.hpp"
#include "truce/eval/evaluate.hpp"
#include "truce/eval/metrics.hpp"
#include "truce/util/error.hpp"

using namespace truce;
namespace tt = truce::train;

namespace {

const data::Dataset& corpus() {
  static const data::Dataset ds = data::gen_synth_dataset(60, 12, data::all_classes(), 5);
  return ds;
}

eval::Instances test_split() { return corpus().split(data::Split::test); }

tt::TrainedModel trained(tt::ModelKind kind, bool heuristic = true) {
  tt::ModelConfig mc;
  mc.kind = kind;
  mc.embed = mc.hidden = mc.inf_embed = mc.inf_hidden = 12;
  tt::TrainConfig tc;
  tc.epochs = 2;
  tc.batch_size = 16;
  tc.learning_rate = 3e-3;
  tc.probe_size = 0;
  tc.dev_limit = 3;
  tc.no_heuristic = !heuristic;
  return tt::TrainedModel::from_checkpoint(tt::train(mc, tc, corpus()).checkpoint);
}

const tt::TrainedModel& truce_model() {
  static const tt::TrainedModel m = trained(tt::ModelKind::truce);
  return m;
}

}  // namespace

TEST_CASE("a uniform decoder has perplexity equal to the vocabulary size") {
  for (auto kind : {tt::ModelKind::truce, tt::ModelKind::fc}) {
    auto tm = kind == tt::ModelKind::truce ? truce_model() : trained(kind);
    for (const char* name : {"dec.out_w", "dec.out_b"})
      std::fill(tm.params.at(name).storage().begin(), tm.params.at(name).storage().end(), 0.0f);
    CHECK(eval::perplexity(tm, test_split()) == doctest::Approx(tm.vocab.size()).epsilon(1e-5));
  }
}

TEST_CASE("results do not depend on the worker count") {
  const auto& tm = truce_model();
  const auto a = eval::evaluate_metrics(tm, test_split(), 1);
  const auto b = eval::evaluate_metrics(tm, test_split(), 3);
  CHECK(eval::to_json(a) == eval::to_json(b));
  const auto ca = eval::coverage_curve(tm, test_split(), 4, eval::kDefaultTopP, 9, 1);
  const auto cb = eval::coverage_curve(tm, test_split(), 4, eval::kDefaultTopP, 9, 4);
  REQUIRE(ca.size() == cb.size());
  for (std::size_t k = 0; k < ca.size(); ++k) {
    CHECK(ca[k].coverage == cb[k].coverage);
    CHECK(ca[k].correctness == cb[k].correctness);
  }
}

TEST_CASE("metric report agrees with the scorers") {
  const auto& tm = truce_model();
  const auto rep = eval::evaluate_metrics(tm, test_split());
  REQUIRE(rep.records.size() == test_split().size());
  std::vector<metrics::Tokens> cands;
  std::vector<metrics::References> refs;
  int correct = 0;
  for (std::size_t k = 0; k < rep.records.size(); ++k) {
    cands.push_back(data::split_words(rep.records[k].caption));
    metrics::References r;
    for (const auto& c : test_split()[k]->captions) r.push_back(data::split_words(c));
    refs.push_back(r);
    REQUIRE(rep.records[k].correct);
    correct += *rep.records[k].correct;
  }
  CHECK(rep.bleu4 == doctest::Approx(metrics::bleu(cands, refs, 4)));
  CHECK(rep.rouge_l == doctest::Approx(metrics::rouge_l(cands, refs)));
  REQUIRE(rep.correctness);
  CHECK(*rep.correctness == doctest::Approx(double(correct) / rep.records.size()));
  CHECK(*rep.correctness == doctest::Approx(eval::correctness(tm, test_split())));
}

TEST_CASE("one near-greedy sample per series reproduces greedy correctness") {
  // every reference of a SYNTH series shares its class, so with L = 1 the
  // coverage is the sample correctness, and a tiny nucleus keeps the argmax program
  const auto& tm = truce_model();
  const auto pts = eval::coverage_curve(tm, test_split(), 1, {1e-9, 1.0}, 3);
  for (const auto& p : pts) {
    REQUIRE(p.correctness);
    CHECK(p.coverage == doctest::Approx(*p.correctness));
    CHECK(p.samples == static_cast<int>(test_split().size()));
  }
  CHECK(*pts[0].correctness == doctest::Approx(eval::correctness(tm, test_split())));
}

TEST_CASE("coverage does not shrink as samples are added") {
  const auto& tm = truce_model();
  const auto few = eval::coverage_curve(tm, test_split(), 2, {0.9}, 4);
  const auto many = eval::coverage_curve(tm, test_split(), 8, {0.9}, 4);
  CHECK(many[0].coverage >= few[0].coverage);
}

TEST_CASE("word tables leave out stop words") {
  const auto& tm = truce_model();
  const auto sw = metrics::default_stopwords();
  REQUIRE(std::find(sw.begin(), sw.end(), "the") != sw.end());
  for (auto src : {eval::WordSource::prior, eval::WordSource::inference}) {
    const auto t = eval::module_word_table(tm, corpus().split(data::Split::train), src, sw);
    CHECK(t.pattern.size() == 6);
    CHECK(t.locate.size() == 4);
    int total = 0;
    for (const auto* group : {&t.pattern, &t.locate})
      for (const auto& m : *group) {
        CHECK(m.words.size() <= 6);
        for (const auto& [w, n] : m.words) {
          CHECK_FALSE(std::binary_search(sw.begin(), sw.end(), w));
          CHECK(n > 0);
          total += n;
        }
        for (std::size_t k = 1; k < m.words.size(); ++k) CHECK(m.words[k - 1].second >= m.words[k].second);
      }
    CHECK(total > 0);
  }
}

TEST_CASE("composition needs an anchored program model") {
  CHECK_THROWS_AS(eval::composition_eval(trained(tt::ModelKind::truce, false), test_split()), ArgumentError);
  CHECK_THROWS_AS(eval::composition_eval(trained(tt::ModelKind::conv), test_split()), ArgumentError);
  const auto r = eval::composition_eval(truce_model(), test_split());
  CHECK(r.instances == static_cast<int>(test_split().size()));
  CHECK(r.chance == doctest::Approx(1.0 / 24));
  CHECK(r.accuracy >= 0.0);
  CHECK(r.accuracy <= 1.0);
}

TEST_CASE("correctness needs pattern metadata") {
  data::Instance plain = *test_split()[0];
  plain.meta.reset();
  CHECK_THROWS_AS(eval::correctness(truce_model(), {&plain}), ArgumentError);
}

TEST_CASE("coverage plot is a standalone svg") {
  const auto path = std::filesystem::temp_directory_path() / "truce_test_cov.svg";
  const auto pts = eval::coverage_curve(truce_model(), test_split(), 2, eval::kDefaultTopP, 1);
  eval::write_coverage_svg(path, {{"truce", pts}});
  std::ifstream in(path);
  const std::string s((std::istreambuf_iterator<char>(in)), {});
  CHECK(s.find("<svg") != std::string::npos);
  CHECK(s.find("</svg>") != std::string::npos);
  std::filesystem::remove(path);
}

TEST_CASE("nearest neighbour returns a training caption of the closest series") {
  const base::NearestNeighbor nn(corpus());
  const auto train = corpus().split(data::Split::train);
  REQUIRE(nn.size() == train.size());
  Rng rng(1);
  for (std::size_t k = 0; k < train.size(); k += 7) {
    const auto& s = train[k]->series;
    const std::size_t hit = nn.nearest(s);
    CHECK(train[hit]->series == s);
    CHECK(hit <= k);  // duplicates resolve to the first
    const auto& c = nn.caption(s, rng);
    const auto& caps = train[hit]->captions;
    CHECK(std::find(caps.begin(), caps.end(), c) != caps.end());
    // a series of twice the length is compared on alternate values
    std::vector<double> twice;
    for (double v : s) {
      twice.push_back(v);
      twice.push_back(-1000.0);
    }
    CHECK(nn.nearest(twice) == hit);
  }
  CHECK_THROWS(nn.nearest(std::vector<double>(5, 0.0)));
}
