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
#include <string>
#include <vector>

// Finite-difference checks of every network, run against the double-precision
// build. The interface is precision-free so f32 binaries can call it.
namespace truce::gradsuite {

struct NetworkResult {
  std::string network;
  int instances = 0;
  int failed_instances = 0;
  int coordinates = 0;
  int resampled = 0;  // draws rejected for sitting too close to a relu kink
  double max_rel = 0.0;
  std::string worst;
  double seconds = 0.0;
};

std::vector<std::string> network_names();
NetworkResult check_network(const std::string& network, int instances, std::uint64_t seed);

}  // namespace truce::gradsuite
