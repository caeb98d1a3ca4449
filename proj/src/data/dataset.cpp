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

#include "truce/data/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "truce/util/error.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace truce::data {

std::string_view to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::dev: return "dev";
    case Split::test: return "test";
  }
  return "?";
}

Split parse_split(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "dev" || s == "valid" || s == "val" || s == "validation") return Split::dev;
  if (s == "test") return Split::test;
  throw SchemaError("unknown split '" + std::string(s) + "'");
}

std::vector<const Instance*> Dataset::split(Split s) const {
  std::vector<const Instance*> out;
  for (const auto& inst : instances)
    if (inst.split == s) out.push_back(&inst);
  return out;
}

std::vector<std::string> Dataset::train_captions() const {
  std::vector<std::string> out;
  for (const auto* inst : split(Split::train)) out.insert(out.end(), inst->captions.begin(), inst->captions.end());
  return out;
}

bool Dataset::has_meta() const {
  return !instances.empty() &&
         std::all_of(instances.begin(), instances.end(), [](const Instance& i) { return i.meta.has_value(); });
}

void assign_splits(Dataset& ds, std::uint64_t seed) {
  // group indices by series value, in first-appearance order
  std::map<std::vector<double>, std::size_t> group_of;
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < ds.instances.size(); ++i) {
    auto [it, fresh] = group_of.emplace(ds.instances[i].series, groups.size());
    if (fresh) groups.emplace_back();
    groups[it->second].push_back(i);
  }
  std::vector<std::size_t> order(groups.size());
  for (std::size_t g = 0; g < order.size(); ++g) order[g] = g;
  Rng rng(Rng::derive(seed, "splits"));
  for (std::size_t i = order.size(); i > 1; --i)  // Fisher-Yates with the portable draw
    std::swap(order[i - 1], order[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i) - 1))]);
  const std::size_t n = order.size();
  const std::size_t n_train = n * 8 / 10;
  const std::size_t n_dev = n / 10;
  for (std::size_t r = 0; r < n; ++r) {
    const Split s = r < n_train ? Split::train : r < n_train + n_dev ? Split::dev : Split::test;
    for (std::size_t i : groups[order[r]]) ds.instances[i].split = s;
  }
}

Dataset gen_synth_dataset(int n, int T, const std::vector<SynthClass>& classes, std::uint64_t seed,
                          int captions_per_series) {
  if (n <= 0) throw ArgumentError("dataset size must be positive");
  if (classes.empty()) throw ArgumentError("empty class list");
  Dataset ds;
  ds.instances.reserve(n);
  for (int k = 0; k < n; ++k) {
    char id[32];
    std::snprintf(id, sizeof id, "synth-%06d", k + 1);
    Rng rng(Rng::derive(seed, id));
    SynthSeries s = gen_synth_series(classes[k % classes.size()], T, rng);
    Instance inst;
    inst.id = id;
    inst.series = std::move(s.values);
    for (int c = 0; c < captions_per_series; ++c) inst.captions.push_back(gen_synth_caption(s.meta, rng));
    inst.meta = s.meta;
    ds.instances.push_back(std::move(inst));
  }
  assign_splits(ds, seed);
  return ds;
}

json to_json(const Instance& inst) {
  json j;
  j["id"] = inst.id;
  j["series"] = inst.series;
  j["captions"] = inst.captions;
  if (inst.meta) {
    const PatternMeta& m = *inst.meta;
    j["meta"] = {{"trend", to_string(m.trend)}, {"location", to_string(m.location)},
                 {"start", m.start},            {"length", m.length},
                 {"slope", m.slope},            {"intercept", m.intercept}};
  } else {
    j["meta"] = nullptr;
  }
  j["split"] = to_string(inst.split);
  return j;
}

namespace {

[[noreturn]] void schema_fail(std::size_t line, const std::string& what) {
  throw SchemaError("dataset line " + std::to_string(line) + ": " + what);
}

const json& field(const json& j, const char* name, std::size_t line) {
  if (!j.is_object()) schema_fail(line, "record is not an object");
  auto it = j.find(name);
  if (it == j.end()) schema_fail(line, std::string("missing field \"") + name + "\"");
  return *it;
}

}  // namespace

Instance instance_from_json(const json& j, std::size_t line) {
  Instance inst;
  try {
    inst.id = field(j, "id", line).get<std::string>();
    const json& series = field(j, "series", line);
    if (!series.is_array() || series.empty()) schema_fail(line, "field \"series\" must be a nonempty array");
    inst.series = series.get<std::vector<double>>();
    inst.captions = field(j, "captions", line).get<std::vector<std::string>>();
    const json& meta = field(j, "meta", line);
    if (!meta.is_null()) {
      PatternMeta m;
      m.trend = parse_trend(field(meta, "trend", line).get<std::string>());
      m.location = parse_location(field(meta, "location", line).get<std::string>());
      m.start = field(meta, "start", line).get<int>();
      m.length = field(meta, "length", line).get<int>();
      m.slope = field(meta, "slope", line).get<double>();
      m.intercept = field(meta, "intercept", line).get<double>();
      inst.meta = m;
    }
    inst.split = parse_split(field(j, "split", line).get<std::string>());
  } catch (const json::exception& e) {
    schema_fail(line, e.what());
  } catch (const ArgumentError& e) {
    schema_fail(line, e.what());
  }
  return inst;
}

void save_dataset(const Dataset& ds, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& inst : ds.instances) out << to_json(inst).dump() << '\n';
  if (!out) throw Error("write failed: " + path.string());
}

Dataset load_dataset(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  Dataset ds;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      schema_fail(lineno, e.what());
    }
    ds.instances.push_back(instance_from_json(j, lineno));
  }
  return ds;
}

// ---- released-corpus converter ----

namespace {

const std::initializer_list<const char*> kSeriesKeys = {"series", "values", "data", "ts", "time_series", "timeseries"};

const json* find_alias(const json& rec, std::initializer_list<const char*> names) {
  for (const char* n : names) {
    auto it = rec.find(n);
    if (it != rec.end() && !it->is_null()) return &*it;
  }
  return nullptr;
}

bool is_series(const json* j) {
  return j && j->is_array() && !j->empty() && std::all_of(j->begin(), j->end(), [](const json& v) { return v.is_number(); });
}

std::vector<json> read_records(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<json> records;
  try {
    json j = json::parse(text);
    if (j.is_array()) {
      records.assign(j.begin(), j.end());
    } else if (j.is_object() && is_series(find_alias(j, kSeriesKeys))) {
      records.push_back(std::move(j));  // a single record, or one line of JSONL
    } else if (j.is_object()) {
      const json* list = find_alias(j, {"data", "instances", "records", "examples"});
      if (list && list->is_array()) {
        records.assign(list->begin(), list->end());
      } else {
        // keyed by id: {"id1": {...}, ...}
        for (auto& [k, v] : j.items()) {
          json rec = v;
          if (rec.is_object() && !rec.contains("id")) rec["id"] = k;
          records.push_back(std::move(rec));
        }
      }
    }
    return records;
  } catch (const json::parse_error&) {
    // fall through to JSON lines
  }
  std::istringstream lines(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw SchemaError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return records;
}

std::optional<Split> split_from_filename(const fs::path& p) {
  const std::string stem = p.stem().string();
  if (stem.find("train") != std::string::npos) return Split::train;
  if (stem.find("dev") != std::string::npos || stem.find("val") != std::string::npos) return Split::dev;
  if (stem.find("test") != std::string::npos) return Split::test;
  return std::nullopt;
}

}  // namespace

Dataset convert_released(const fs::path& path, std::uint64_t seed) {
  std::vector<fs::path> files;
  if (fs::is_directory(path)) {
    for (const auto& e : fs::directory_iterator(path)) {
      const auto ext = e.path().extension();
      if (e.is_regular_file() && (ext == ".json" || ext == ".jsonl")) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(path);
  }
  if (files.empty()) throw Error("no .json/.jsonl files under " + path.string());

  Dataset ds;
  bool all_split = true;
  for (const auto& file : files) {
    const auto file_split = split_from_filename(file);
    std::size_t k = 0;
    for (const json& rec : read_records(file)) {
      ++k;
      const std::string where = file.filename().string() + " record " + std::to_string(k);
      if (!rec.is_object()) throw SchemaError(where + ": not an object");
      Instance inst;
      const json* series = find_alias(rec, kSeriesKeys);
      if (!series || !series->is_array()) throw SchemaError(where + ": no series field");
      try {
        inst.series = series->get<std::vector<double>>();
        const json* caps = find_alias(rec, {"captions", "annotations", "descriptions", "caption", "description", "labels"});
        if (caps && caps->is_string()) {
          inst.captions.push_back(caps->get<std::string>());
        } else if (caps && caps->is_array()) {
          for (const json& c : *caps) {
            if (c.is_string()) inst.captions.push_back(c.get<std::string>());
            else if (c.is_object() && c.contains("caption")) inst.captions.push_back(c["caption"].get<std::string>());
            else if (c.is_object() && c.contains("text")) inst.captions.push_back(c["text"].get<std::string>());
          }
        }
      } catch (const json::exception& e) {
        throw SchemaError(where + ": " + e.what());
      }
      const json* id = find_alias(rec, {"id", "uid", "key", "idx"});
      if (id) inst.id = id->is_string() ? id->get<std::string>() : id->dump();
      else inst.id = file.stem().string() + "-" + std::to_string(k);
      const json* sp = find_alias(rec, {"split"});
      if (sp && sp->is_string()) inst.split = parse_split(sp->get<std::string>());
      else if (file_split) inst.split = *file_split;
      else all_split = false;
      ds.instances.push_back(std::move(inst));
    }
  }
  if (!all_split) assign_splits(ds, seed);
  return ds;
}

}  // namespace truce::data
