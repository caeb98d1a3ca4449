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

#include "truce/data/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "truce/util/error.hpp"

namespace truce::data {
namespace {

constexpr int kMaxTries = 100;
constexpr double kNoise = 2.0;

// Percent bounds of the placement windows: [lo, hi).
constexpr std::array<std::array<int, 2>, 3> kWindowPct = {{{0, 40}, {30, 70}, {60, 100}}};

const std::array<std::array<const char*, 3>, 2> kTrendWords = {{
    {"increases", "rises", "goes up"},
    {"decreases", "declines", "dips"},
}};

const std::array<std::array<const char*, 3>, 3> kLocationPhrases = {{
    {"at the beginning", "at the start", "early on"},
    {"around the middle", "in the middle", "halfway through"},
    {"at the end", "late in the series", "towards the end"},
}};

const std::array<const char*, 4> kSubjects = {"stock", "price", "value", "series"};

// {S} subject, {V} trend verb, {L} location phrase
const std::array<const char*, 6> kFrames = {
    "{S} {V} {L}",
    "the {S} {V} {L}",
    "{L} , the {S} {V}",
    "{S} {V} sharply {L}",
    "the {S} {V} steadily {L}",
    "{L} the {S} {V} quickly",
};

void replace_all(std::string& s, std::string_view what, std::string_view with) {
  for (std::size_t pos = s.find(what); pos != std::string::npos; pos = s.find(what, pos + with.size()))
    s.replace(pos, what.size(), with);
}

}  // namespace

std::string_view to_string(Trend t) { return t == Trend::increase ? "increase" : "decrease"; }

std::string_view to_string(Location l) {
  switch (l) {
    case Location::begin: return "begin";
    case Location::middle: return "middle";
    case Location::end: return "end";
  }
  return "?";
}

Trend parse_trend(std::string_view s) {
  if (s == "increase") return Trend::increase;
  if (s == "decrease") return Trend::decrease;
  throw ArgumentError("unknown trend '" + std::string(s) + "'");
}

Location parse_location(std::string_view s) {
  if (s == "begin") return Location::begin;
  if (s == "middle") return Location::middle;
  if (s == "end") return Location::end;
  throw ArgumentError("unknown location '" + std::string(s) + "'");
}

std::string class_name(SynthClass c) {
  return std::string(to_string(c.trend)) + "-" + std::string(to_string(c.location));
}

SynthClass parse_class(std::string_view s) {
  const auto dash = s.find('-');
  if (dash == std::string_view::npos) throw ArgumentError("class must be trend-location, got '" + std::string(s) + "'");
  return {parse_trend(s.substr(0, dash)), parse_location(s.substr(dash + 1))};
}

std::vector<SynthClass> all_classes() {
  std::vector<SynthClass> out;
  for (Trend t : {Trend::increase, Trend::decrease})
    for (Location l : {Location::begin, Location::middle, Location::end}) out.push_back({t, l});
  return out;
}

std::vector<SynthClass> composition_train_classes() {
  return {{Trend::increase, Location::begin},
          {Trend::decrease, Location::end},
          {Trend::increase, Location::middle},
          {Trend::decrease, Location::middle}};
}

std::vector<SynthClass> composition_heldout_classes() {
  return {{Trend::increase, Location::end}, {Trend::decrease, Location::begin}};
}

IndexRange placement_window(Location loc, int T) {
  const auto& pct = kWindowPct[static_cast<int>(loc)];
  // first index t with t >= lo% of T, last index t with t < hi% of T
  const int first = (pct[0] * T + 99) / 100;
  const int last = (pct[1] * T + 99) / 100 - 1;
  return {first, last};
}

SynthSeries gen_synth_series(SynthClass c, int T, Rng& rng) {
  if (T < 6) throw ArgumentError("synthetic series need T >= 6, got " + std::to_string(T));
  const IndexRange win = placement_window(c.location, T);
  const int max_len = std::min(T / 3, win.last - win.first + 1);

  for (int attempt = 0; attempt < kMaxTries; ++attempt) {
    SynthSeries s;
    PatternMeta& m = s.meta;
    m.trend = c.trend;
    m.location = c.location;
    m.length = rng.uniform_int(2, max_len);
    m.start = rng.uniform_int(win.first, win.last - m.length + 1);
    const double a = rng.uniform(0.0, 2.0);
    m.intercept = rng.uniform(1.0, 20.0);

    // distinct integer abscissae with a*x + b inside (0, 100)
    if (a <= 1e-6) continue;
    const int x_max = static_cast<int>(std::ceil((100.0 - m.intercept) / a)) - 1;
    if (x_max + 1 < m.length) continue;
    std::vector<int> xs;
    while (static_cast<int>(xs.size()) < m.length) {
      const int x = rng.uniform_int(0, x_max);
      if (std::find(xs.begin(), xs.end(), x) == xs.end()) xs.push_back(x);
    }
    std::sort(xs.begin(), xs.end());
    std::vector<double> seg;
    for (int x : xs) seg.push_back(a * x + m.intercept);
    if (c.trend == Trend::decrease) std::reverse(seg.begin(), seg.end());
    m.slope = c.trend == Trend::increase ? a : -a;

    s.clean.resize(T);
    for (int t = 0; t < T; ++t) {
      const int k = std::clamp(t - m.start, 0, m.length - 1);
      s.clean[t] = seg[k];
    }
    s.noise.resize(T);
    s.values.resize(T);
    bool inside = true;
    for (int t = 0; t < T; ++t) {
      s.noise[t] = rng.uniform(-kNoise, kNoise);
      s.values[t] = s.clean[t] + s.noise[t];
      inside = inside && s.values[t] > 0.0 && s.values[t] < 100.0;
    }
    if (inside) return s;
  }
  throw NumericError("synthetic generator: no in-range draw for " + class_name(c) + " after " +
                     std::to_string(kMaxTries) + " tries");
}

int caption_frame_count() { return static_cast<int>(kFrames.size()); }
int trend_word_count() { return 3; }
int location_phrase_count() { return 3; }
int subject_count() { return static_cast<int>(kSubjects.size()); }

std::string render_caption(Trend t, Location l, const CaptionChoice& ch) {
  std::string s = kFrames.at(ch.frame);
  replace_all(s, "{S}", kSubjects.at(ch.subject));
  replace_all(s, "{V}", kTrendWords[static_cast<int>(t)].at(ch.trend_word));
  replace_all(s, "{L}", kLocationPhrases[static_cast<int>(l)].at(ch.location_phrase));
  return s;
}

std::string gen_synth_caption(const PatternMeta& meta, Rng& rng) {
  CaptionChoice ch;
  ch.frame = rng.uniform_int(0, caption_frame_count() - 1);
  ch.trend_word = rng.uniform_int(0, trend_word_count() - 1);
  ch.location_phrase = rng.uniform_int(0, location_phrase_count() - 1);
  ch.subject = rng.uniform_int(0, subject_count() - 1);
  return render_caption(meta.trend, meta.location, ch);
}

}  // namespace truce::data
