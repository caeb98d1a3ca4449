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

#include <string>
#include <vector>

// Corpus-level caption metrics over tokenized text. Candidates and reference
// sets are aligned by index; every candidate needs at least one reference.
namespace truce::metrics {

using Tokens = std::vector<std::string>;
using References = std::vector<Tokens>;

// Smoothing floor for an order with no matching n-grams.
inline constexpr double kBleuEpsilon = 1e-9;

// Corpus BLEU up to order n: clipped n-gram precisions summed over the
// corpus, geometric mean over orders 1..n, brevity penalty against the
// closest reference length (shorter reference on ties).
double bleu(const std::vector<Tokens>& candidates, const std::vector<References>& references, int n);

// Mean over candidates of the best LCS F-measure (beta = 1) across references.
double rouge_l(const std::vector<Tokens>& candidates, const std::vector<References>& references);

// CIDEr (not CIDEr-D): tf-idf n-gram vectors for n = 1..4, document
// frequencies from the reference sets, cosine similarity averaged over
// references and orders, corpus mean, times 10.
inline constexpr double kCiderScale = 10.0;
double cider(const std::vector<Tokens>& candidates, const std::vector<References>& references);

// Stop-word filter used by the word-association tables.
// Sorted; the default is the list shipped in data/stopwords.txt.
std::vector<std::string> load_stopwords(const std::string& path);
std::vector<std::string> default_stopwords();

}  // namespace truce::metrics
