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
#include <span>
#include <string>
#include <vector>

#include "truce/data/dataset.hpp"
#include "truce/util/rng.hpp"

namespace truce::data {

// Min-max scaling to [0, 100] with min/max taken over the window and up to
// ten context values on either side. Empty when the extended window is constant.
std::optional<std::vector<double>> normalize_window(std::span<const double> window,
                                                    std::span<const double> context_before,
                                                    std::span<const double> context_after);

struct PriceSeries {
  std::string company;
  std::string granularity;  // "daily" or "weekly"
  std::vector<double> prices;
};

// `date,price` lines; a non-numeric first line is treated as a header.
std::vector<double> read_price_csv(const std::filesystem::path& path);
// Every <company>_<daily|weekly>.csv under dir, sorted by file name.
std::vector<PriceSeries> load_price_dir(const std::filesystem::path& dir);

struct StockWindow {
  std::vector<double> values;
  std::string company;
  std::string granularity;
  int start = 0;
};

struct StockSample {
  std::vector<StockWindow> windows;
  int degenerate = 0;  // constant windows rejected and redrawn
  int shortfall = 0;   // requested windows that could not be placed
};

inline constexpr int kContext = 10;

// Company uniformly, then granularity uniformly among that company's series,
// then a window start uniformly; windows never overlap within one series.
// Series shorter than T + 2 * kContext are ignored.
StockSample sample_stock_windows(const std::vector<PriceSeries>& sources, int T, int count, Rng& rng);

// Uncaptioned instances "stock-000001"... with splits assigned.
Dataset stock_dataset(const StockSample& sample, std::uint64_t seed);

}  // namespace truce::data
