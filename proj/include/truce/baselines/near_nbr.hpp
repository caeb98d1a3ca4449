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

#include "truce/data/dataset.hpp"
#include "truce/numerics/real.hpp"
#include "truce/util/rng.hpp"

namespace truce::inline TRUCE_PRECISION::base {

// Retrieval baseline: the captions of the closest training series in L2.
// Queries of twice the training length are compared on alternate values.
class NearestNeighbor {
 public:
  explicit NearestNeighbor(const data::Dataset& ds);  // uses the train split

  // Index of the closest training series; ties go to the lowest index.
  std::size_t nearest(std::span<const double> series) const;
  // One of its captions, chosen uniformly by rng.
  const std::string& caption(std::span<const double> series, Rng& rng) const;
  std::size_t size() const { return series_.size(); }

 private:
  std::vector<std::vector<double>> series_;
  std::vector<std::vector<std::string>> captions_;
  int T_ = 0;
};

}  // namespace truce::inline TRUCE_PRECISION::base
