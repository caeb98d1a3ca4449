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

#include "truce/data/lexicon.hpp"

#include <algorithm>

#include "truce/data/vocab.hpp"

namespace truce::data {
namespace {

using Alias = std::vector<std::string>;

bool matches_at(const std::vector<std::string>& words, std::size_t pos, const Alias& alias) {
  if (pos + alias.size() > words.size()) return false;
  for (std::size_t k = 0; k < alias.size(); ++k)
    if (words[pos + k].compare(0, alias[k].size(), alias[k]) != 0) return false;
  return true;
}

std::vector<int> hits(const std::vector<KeywordGroup>& groups, const std::vector<std::string>& words) {
  std::vector<int> out;
  for (int g = 0; g < static_cast<int>(groups.size()); ++g) {
    bool found = false;
    for (std::size_t pos = 0; pos < words.size() && !found; ++pos)
      for (const Alias& a : groups[g].aliases)
        if (matches_at(words, pos, a)) {
          found = true;
          break;
        }
    if (found) out.push_back(g);
  }
  return out;
}

}  // namespace

HeuristicLexicon::HeuristicLexicon()
    : HeuristicLexicon(
          {
              {"increase", {{"increas"}, {"rise"}, {"rises"}, {"rising"}, {"rose"}, {"grow"}, {"grew"}, {"climb"},
                            {"go", "up"}, {"went", "up"}, {"upward"}}},
              {"decrease", {{"decreas"}, {"declin"}, {"fall"}, {"fell"}, {"drop"}, {"reduc"}, {"go", "down"},
                            {"went", "down"}, {"downward"}}},
              {"peak", {{"peak"}, {"spike"}}},
              {"flat", {{"flat"}, {"stable"}, {"constant"}}},
              {"dip", {{"dip"}}},
          },
          {
              {"beginning", {{"begin"}, {"start"}, {"early"}, {"initial"}}},
              {"middle", {{"middle"}, {"mid"}, {"halfway"}, {"center"}, {"centre"}}},
              {"end", {{"end"}, {"late"}, {"final"}}},
              {"throughout", {{"throughout"}, {"entire"}, {"overall"}}},
          }) {}

HeuristicLexicon::HeuristicLexicon(std::vector<KeywordGroup> patterns, std::vector<KeywordGroup> locates)
    : patterns_(std::move(patterns)), locates_(std::move(locates)) {}

std::vector<int> HeuristicLexicon::pattern_hits(const std::vector<std::string>& words) const {
  return hits(patterns_, words);
}

std::vector<int> HeuristicLexicon::locate_hits(const std::vector<std::string>& words) const {
  return hits(locates_, words);
}

std::optional<std::pair<int, int>> HeuristicLexicon::label(const std::string& caption) const {
  const auto words = split_words(caption);
  const auto p = pattern_hits(words);
  const auto l = locate_hits(words);
  if (p.size() != 1 || l.size() != 1) return std::nullopt;
  return std::make_pair(p[0], l[0]);
}

std::optional<SynthClass> HeuristicLexicon::oracle(const std::string& caption) const {
  const auto lab = label(caption);
  if (!lab) return std::nullopt;
  const std::string& p = patterns_[lab->first].keyword;
  const std::string& l = locates_[lab->second].keyword;
  std::optional<Trend> t;
  if (p == "increase") t = Trend::increase;
  if (p == "decrease" || p == "dip") t = Trend::decrease;
  std::optional<Location> loc;
  if (l == "beginning") loc = Location::begin;
  if (l == "middle") loc = Location::middle;
  if (l == "end") loc = Location::end;
  if (!t || !loc) return std::nullopt;
  return SynthClass{*t, *loc};
}

std::vector<int> HeuristicLexicon::pattern_ids_for(Trend t) const {
  std::vector<int> out;
  for (int g = 0; g < static_cast<int>(patterns_.size()); ++g) {
    const std::string& k = patterns_[g].keyword;
    if (t == Trend::increase ? k == "increase" : (k == "decrease" || k == "dip")) out.push_back(g);
  }
  return out;
}

int HeuristicLexicon::locate_id_for(Location l) const {
  const char* want = l == Location::begin ? "beginning" : l == Location::middle ? "middle" : "end";
  for (int g = 0; g < static_cast<int>(locates_.size()); ++g)
    if (locates_[g].keyword == want) return g;
  return -1;
}

}  // namespace truce::data
