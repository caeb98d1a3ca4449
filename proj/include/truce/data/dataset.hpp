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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "truce/data/synth.hpp"
#include "truce/data/vocab.hpp"

namespace truce::data {

enum class Split { train, dev, test };
std::string_view to_string(Split s);
Split parse_split(std::string_view s);

struct Instance {
  std::string id;
  std::vector<double> series;
  std::vector<std::string> captions;
  std::optional<PatternMeta> meta;
  Split split = Split::train;
  bool operator==(const Instance&) const = default;
};

struct Dataset {
  std::vector<Instance> instances;

  std::vector<const Instance*> split(Split s) const;
  // Captions of the train split, in instance order.
  std::vector<std::string> train_captions() const;
  bool has_meta() const;
  bool operator==(const Dataset&) const = default;
};

// Partition by unique series (value equality) into train/dev/test 8:1:1.
// Groups are shuffled with `seed`; identical series always share a split.
void assign_splits(Dataset& ds, std::uint64_t seed);

// `per_class`-balanced SYNTH corpus: instance k has class classes[k % size],
// three template captions, ids "synth-000001"...; splits assigned.
Dataset gen_synth_dataset(int n, int T, const std::vector<SynthClass>& classes, std::uint64_t seed,
                          int captions_per_series = 3);

// Canonical JSONL: one {"id","series","captions","meta","split"} object per line.
nlohmann::json to_json(const Instance& inst);
Instance instance_from_json(const nlohmann::json& j, std::size_t line);
void save_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

// Released-corpus converter: accepts a JSON array, a JSON object holding a
// list, or JSON lines. Field names are matched against common aliases
// (series/values/data/ts, captions/annotations/descriptions/caption, id/uid,
// split). Records without a split get one from assign_splits(seed).
Dataset convert_released(const std::filesystem::path& path, std::uint64_t seed);

}  // namespace truce::data
