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
#include <random>
#include <string_view>

namespace truce {

// Seeded generator shared by every stochastic component.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi);
  float uniformf(float lo, float hi) { return static_cast<float>(uniform(lo, hi)); }
  // Integer in [lo, hi] inclusive.
  int uniform_int(int lo, int hi);
  bool bernoulli(double p) { return uniform(0.0, 1.0) < p; }
  std::uint64_t next() { return engine_(); }

  std::mt19937_64& engine() { return engine_; }

  // Seed for an independent stream derived from (seed, tag).
  static std::uint64_t derive(std::uint64_t seed, std::string_view tag);

 private:
  std::mt19937_64 engine_;
};

}  // namespace truce
