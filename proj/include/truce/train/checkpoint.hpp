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

#include <filesystem>
#include <string>

#include <json.hpp>

#include "truce/numerics/tensor.hpp"

// Checkpoint file: a text header
//   truce-checkpoint <format version>
//   <manifest byte length>
//   <manifest JSON>
// followed by a u32 tensor count and one block per tensor in name order:
// u32 name length, name bytes, u32 rank, u32 dims, raw little-endian f32.
namespace truce::inline TRUCE_PRECISION::train {

inline constexpr int kCheckpointFormat = 1;

struct Checkpoint {
  nlohmann::json manifest = nlohmann::json::object();
  num::ParameterStore params;
};

std::string serialize_checkpoint(const Checkpoint& c);
Checkpoint parse_checkpoint(const std::string& bytes);

void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path);
// Throws SchemaError on a malformed file or another format version.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace truce::inline TRUCE_PRECISION::train
