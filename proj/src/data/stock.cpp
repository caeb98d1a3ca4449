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

#include "truce/data/stock.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>

#include <spdlog/spdlog.h>

#include "truce/util/error.hpp"

namespace fs = std::filesystem;

namespace truce::data {

std::optional<std::vector<double>> normalize_window(std::span<const double> window,
                                                    std::span<const double> before,
                                                    std::span<const double> after) {
  if (window.empty()) throw ArgumentError("normalize_window: empty window");
  double lo = window[0], hi = window[0];
  for (auto part : {window, before, after})
    for (double v : part) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  if (hi == lo) return std::nullopt;
  std::vector<double> out(window.size());
  for (std::size_t i = 0; i < window.size(); ++i) out[i] = 100.0 * (window[i] - lo) / (hi - lo);
  return out;
}

std::vector<double> read_price_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  std::vector<double> prices;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw SchemaError(path.string() + ":" + std::to_string(lineno) + ": expected date,price");
    std::string field = line.substr(comma + 1);
    field.erase(0, field.find_first_not_of(" \t\""));
    field.erase(field.find_last_not_of(" \t\"") + 1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
      if (prices.empty() && lineno == 1) continue;  // header
      throw SchemaError(path.string() + ":" + std::to_string(lineno) + ": bad price '" + field + "'");
    }
    prices.push_back(v);
  }
  return prices;
}

std::vector<PriceSeries> load_price_dir(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<PriceSeries> out;
  for (const auto& f : files) {
    const std::string stem = f.stem().string();
    const auto us = stem.rfind('_');
    const std::string gran = us == std::string::npos ? "" : stem.substr(us + 1);
    if (gran != "daily" && gran != "weekly") {
      spdlog::warn("skipping {}: name is not <company>_<daily|weekly>.csv", f.filename().string());
      continue;
    }
    out.push_back({stem.substr(0, us), gran, read_price_csv(f)});
  }
  return out;
}

StockSample sample_stock_windows(const std::vector<PriceSeries>& sources, int T, int count, Rng& rng) {
  if (T < 1 || count < 0) throw ArgumentError("sample_stock_windows: bad T or count");
  // company -> indices of its usable series
  std::map<std::string, std::vector<int>> by_company;
  for (int i = 0; i < static_cast<int>(sources.size()); ++i) {
    if (static_cast<int>(sources[i].prices.size()) < T + 2 * kContext) {
      spdlog::warn("{} {}: {} prices, need {}", sources[i].company, sources[i].granularity,
                   sources[i].prices.size(), T + 2 * kContext);
      continue;
    }
    by_company[sources[i].company].push_back(i);
  }
  StockSample out;
  if (by_company.empty()) {
    out.shortfall = count;
    return out;
  }
  std::vector<const std::vector<int>*> companies;
  for (const auto& [name, idx] : by_company) companies.push_back(&idx);

  std::vector<std::vector<char>> used(sources.size());
  for (std::size_t i = 0; i < sources.size(); ++i) used[i].assign(sources[i].prices.size(), 0);

  const int max_draws = 50 * count + 100;
  for (int draw = 0; draw < max_draws && static_cast<int>(out.windows.size()) < count; ++draw) {
    const auto& series_ids = *companies[rng.uniform_int(0, static_cast<int>(companies.size()) - 1)];
    const int sid = series_ids[rng.uniform_int(0, static_cast<int>(series_ids.size()) - 1)];
    const auto& p = sources[sid].prices;
    const int n = static_cast<int>(p.size());
    const int start = rng.uniform_int(0, n - T);
    if (std::any_of(used[sid].begin() + start, used[sid].begin() + start + T, [](char c) { return c != 0; }))
      continue;
    const int b0 = std::max(0, start - kContext);
    const int a1 = std::min(n, start + T + kContext);
    std::span<const double> all(p);
    auto norm = normalize_window(all.subspan(start, T), all.subspan(b0, start - b0),
                                 all.subspan(start + T, a1 - start - T));
    if (!norm) {
      ++out.degenerate;
      continue;
    }
    std::fill(used[sid].begin() + start, used[sid].begin() + start + T, 1);
    out.windows.push_back({std::move(*norm), sources[sid].company, sources[sid].granularity, start});
  }
  out.shortfall = count - static_cast<int>(out.windows.size());
  if (out.shortfall > 0) spdlog::warn("placed {} of {} windows; sources exhausted", out.windows.size(), count);
  return out;
}

Dataset stock_dataset(const StockSample& sample, std::uint64_t seed) {
  Dataset ds;
  int k = 0;
  for (const auto& w : sample.windows) {
    char id[32];
    std::snprintf(id, sizeof id, "stock-%06d", ++k);
    ds.instances.push_back({id, w.values, {}, std::nullopt, Split::train});
  }
  assign_splits(ds, seed);
  return ds;
}

}  // namespace truce::data
