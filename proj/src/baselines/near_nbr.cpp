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

#include "truce/baselines/near_nbr.hpp"

#include <limits>

#include "truce/baselines/encoders.hpp"
#include "truce/util/error.hpp"

namespace truce::inline TRUCE_PRECISION::base {

NearestNeighbor::NearestNeighbor(const data::Dataset& ds) {
  for (const data::Instance* inst : ds.split(data::Split::train)) {
    if (inst->captions.empty()) continue;
    if (T_ == 0) T_ = static_cast<int>(inst->series.size());
    if (static_cast<int>(inst->series.size()) != T_) throw ShapeError("nearest neighbor: mixed series lengths");
    series_.push_back(inst->series);
    captions_.push_back(inst->captions);
  }
  if (series_.empty()) throw ArgumentError("nearest neighbor: empty train split");
}

std::size_t NearestNeighbor::nearest(std::span<const double> series) const {
  const std::vector<double> q = adapt_length(series, T_);
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < series_.size(); ++k) {
    double d = 0.0;
    for (int t = 0; t < T_; ++t) d += (q[t] - series_[k][t]) * (q[t] - series_[k][t]);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

const std::string& NearestNeighbor::caption(std::span<const double> series, Rng& rng) const {
  const auto& caps = captions_[nearest(series)];
  return caps[rng.uniform_int(0, static_cast<int>(caps.size()) - 1)];
}

}  // namespace truce::inline TRUCE_PRECISION::base
