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

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "truce/data/vocab.hpp"
#include "truce/eval/metrics.hpp"

// Worked metric examples. Expected values are written out as the arithmetic
// done by hand from the metric definitions, not computed by the library.
namespace truce::metric_examples {

struct Example {
  std::string name;
  std::function<double()> compute;
  double expected;
};

inline metrics::Tokens tok(const std::string& s) { return data::split_words(s); }

inline std::vector<Example> worked_examples() {
  using metrics::bleu;
  using metrics::cider;
  using metrics::rouge_l;
  // A: "the cat sat" vs {"the cat sat down"}
  // B: "the the the the" vs {"the cat is here"}
  // C: "a price rises at the end" vs {"the price rises at the end", "price goes up late"}
  const std::vector<metrics::Tokens> A{tok("the cat sat")}, B{tok("the the the the")},
      C{tok("a price rises at the end")};
  const std::vector<metrics::References> rA{{tok("the cat sat down")}}, rB{{tok("the cat is here")}},
      rC{{tok("the price rises at the end"), tok("price goes up late")}};
  const std::vector<metrics::Tokens> ABC{A[0], B[0], C[0]};
  const std::vector<metrics::References> rABC{rA[0], rB[0], rC[0]};
  return {
      // p1 = 3/3, c = 3, r = 4
      {"bleu1 A", [=] { return bleu(A, rA, 1); }, std::exp(1.0 - 4.0 / 3.0)},
      {"bleu2 A", [=] { return bleu(A, rA, 2); }, std::exp(1.0 - 4.0 / 3.0)},
      // clipped "the": 1 of 4
      {"bleu1 B", [=] { return bleu(B, rB, 1); }, 0.25},
      // p = 5/6, 4/5, 3/4, 2/3; closest reference has length 6
      {"bleu3 C", [=] { return bleu(C, rC, 3); }, std::cbrt(5.0 / 6 * 4.0 / 5 * 3.0 / 4)},
      {"bleu4 C", [=] { return bleu(C, rC, 4); }, std::pow(5.0 / 6 * 4.0 / 5 * 3.0 / 4 * 2.0 / 3, 0.25)},
      // corpus: p1 = (3+1+5)/(3+4+6), p2 = (2+0+4)/(2+3+5), c = 13, r = 4+4+6
      {"bleu2 corpus", [=] { return bleu(ABC, rABC, 2); },
       std::exp(1.0 - 14.0 / 13.0) * std::sqrt(9.0 / 13 * 6.0 / 10)},
      // LCS 3, P = 1, R = 3/4
      {"rouge A", [=] { return rouge_l(A, rA); }, 2 * 1.0 * 0.75 / 1.75},
      // LCS 1, P = R = 1/4
      {"rouge B", [=] { return rouge_l(B, rB); }, 0.25},
      // best reference: LCS 5 of 6 both ways
      {"rouge C", [=] { return rouge_l(C, rC); }, 5.0 / 6.0},
      {"rouge corpus", [=] { return rouge_l(ABC, rABC); }, (1.5 / 1.75 + 0.25 + 5.0 / 6.0) / 3},
      // two instances, candidates equal to their only reference: "price" has
      // idf 0, the other unigram and the bigram have idf log 2 and cosine 1,
      // orders 3 and 4 are empty. (1 + 1 + 0 + 0) / 4 per instance, times 10.
      {"cider identical", [=] {
         return cider({tok("price rises"), tok("price falls")}, {{tok("price rises")}, {tok("price falls")}});
       },
       5.0},
      // first reference gains "early": cosine 1/sqrt(2) at orders 1 and 2
      {"cider partial", [=] {
         return cider({tok("price rises"), tok("price falls")}, {{tok("price rises early")}, {tok("price falls")}});
       },
       10.0 * ((2.0 / std::sqrt(2.0)) / 4 + 0.5) / 2},
      // identical candidate and reference
      {"bleu4 identical", [=] { return bleu(C, {{C[0]}}, 4); }, 1.0},
      {"rouge identical", [=] { return rouge_l(C, {{C[0]}}); }, 1.0},
  };
}

}  // namespace truce::metric_examples
