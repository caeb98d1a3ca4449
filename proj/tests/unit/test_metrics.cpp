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

#include <cmath>

#include "metric_examples.hpp"
#include "truce/util/error.hpp"

using namespace truce;
using namespace truce::metrics;
using metric_examples::tok;

TEST_CASE("worked examples match the hand computation to four decimals") {
  for (const auto& ex : metric_examples::worked_examples()) {
    const double got = ex.compute();
    INFO(ex.name << ": got " << got << " expected " << ex.expected);
    CHECK(std::abs(got - ex.expected) < 5e-5);
  }
}

TEST_CASE("identical candidates score exactly one") {
  const std::vector<Tokens> c{tok("the stock rises at the end"), tok("price dips early")};
  const std::vector<References> r{{c[0], tok("something else entirely")}, {c[1]}};
  CHECK(bleu(c, r, 4) == 1.0);
  CHECK(rouge_l(c, r) == 1.0);
}

TEST_CASE("disjoint candidates score zero") {
  const std::vector<Tokens> c{tok("alpha beta gamma delta")};
  const std::vector<References> r{{tok("one two three four")}};
  CHECK(bleu(c, r, 4) < 1e-8);
  CHECK(rouge_l(c, r) == 0.0);
}

TEST_CASE("empty candidates count as zero matches") {
  const std::vector<Tokens> c{{}};
  const std::vector<References> r{{tok("one two")}};
  CHECK(bleu(c, r, 4) == 0.0);
  CHECK(rouge_l(c, r) == 0.0);
  CHECK(cider(c, r) == 0.0);
}

TEST_CASE("reference and candidate order do not matter") {
  const std::vector<Tokens> c{tok("the price rises at the start"), tok("value declines late"),
                              tok("the series goes up in the middle")};
  const std::vector<References> r{{tok("the price rises early"), tok("price goes up at the beginning")},
                                  {tok("the value falls at the end")},
                                  {tok("rises halfway through"), tok("the series goes up in the middle"),
                                   tok("a rise around the middle")}};
  std::vector<References> r_rev = r;
  for (auto& refs : r_rev) std::reverse(refs.begin(), refs.end());
  const std::vector<Tokens> c_perm{c[2], c[0], c[1]};
  const std::vector<References> r_perm{r[2], r[0], r[1]};
  for (int n : {1, 2, 3, 4}) {
    CHECK(bleu(c, r, n) == doctest::Approx(bleu(c, r_rev, n)).epsilon(1e-12));
    CHECK(bleu(c, r, n) == doctest::Approx(bleu(c_perm, r_perm, n)).epsilon(1e-12));
  }
  CHECK(rouge_l(c, r) == doctest::Approx(rouge_l(c_perm, r_perm)).epsilon(1e-12));
  CHECK(cider(c, r) == doctest::Approx(cider(c_perm, r_perm)).epsilon(1e-12));
  CHECK(cider(c, r) == doctest::Approx(cider(c, r_rev)).epsilon(1e-12));
  const double ci = cider(c, r) / kCiderScale;
  CHECK(ci >= 0.0);
  CHECK(ci <= 1.0);
}

TEST_CASE("metric argument errors") {
  CHECK_THROWS_AS(bleu({tok("a")}, {}, 4), ArgumentError);
  CHECK_THROWS_AS(rouge_l({tok("a")}, {{}}), ArgumentError);
  CHECK_THROWS_AS(bleu({tok("a")}, {{tok("a")}}, 0), ArgumentError);
}

TEST_CASE("shipped stop-word list") {
  const auto sw = load_stopwords(TRUCE_SOURCE_DIR "/data/stopwords.txt");
  CHECK(sw.size() == 50);
  CHECK(std::binary_search(sw.begin(), sw.end(), "the"));
  CHECK_FALSE(std::binary_search(sw.begin(), sw.end(), "rises"));
}

TEST_CASE("built-in stop words equal the shipped file") {
  CHECK(default_stopwords() == load_stopwords(TRUCE_SOURCE_DIR "/data/stopwords.txt"));
}
