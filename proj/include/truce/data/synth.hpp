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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "truce/util/rng.hpp"

namespace truce::data {

enum class Trend { increase, decrease };
enum class Location { begin, middle, end };

std::string_view to_string(Trend t);
std::string_view to_string(Location l);
Trend parse_trend(std::string_view s);
Location parse_location(std::string_view s);

struct SynthClass {
  Trend trend;
  Location location;
  bool operator==(const SynthClass&) const = default;
};

// "increase-begin" etc.
std::string class_name(SynthClass c);
SynthClass parse_class(std::string_view s);

// The six trend x location classes, increase first.
std::vector<SynthClass> all_classes();
// Training classes for the composition experiment; increase-end and
// decrease-begin are held out.
std::vector<SynthClass> composition_train_classes();
std::vector<SynthClass> composition_heldout_classes();

struct PatternMeta {
  Trend trend = Trend::increase;
  Location location = Location::begin;
  int start = 0;   // first index of the linear segment
  int length = 0;  // L
  double slope = 0.0;  // negative for a decrease
  double intercept = 0.0;
  bool operator==(const PatternMeta&) const = default;
};

// Placement window of a location as an index range [first, last].
// begin covers the first 40% of positions, middle 30-70%, end 60-100%.
struct IndexRange {
  int first;
  int last;
};
IndexRange placement_window(Location loc, int T);

struct SynthSeries {
  std::vector<double> values;  // clean + noise
  std::vector<double> clean;
  std::vector<double> noise;
  PatternMeta meta;
};

// One series of class c and length T. Throws ArgumentError for T < 6.
SynthSeries gen_synth_series(SynthClass c, int T, Rng& rng);

// Template captioner. Frames, trend verbs and location phrases are indexed so
// tests can enumerate every combination.
struct CaptionChoice {
  int frame = 0;
  int trend_word = 0;
  int location_phrase = 0;
  int subject = 0;
};
int caption_frame_count();
int trend_word_count();
int location_phrase_count();
int subject_count();
std::string render_caption(Trend t, Location l, const CaptionChoice& choice);
std::string gen_synth_caption(const PatternMeta& meta, Rng& rng);

}  // namespace truce::data
