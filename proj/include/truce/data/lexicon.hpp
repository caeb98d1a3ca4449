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

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "truce/data/synth.hpp"

namespace truce::data {

// Keyword groups used for heuristic program labels and the SYNTH oracle.
// Each group has a keyword (its module id is the group's index) and aliases;
// an alias is a sequence of lowercase stems matched as prefixes of
// consecutive caption words ("go up" matches "goes up").
struct KeywordGroup {
  std::string keyword;
  std::vector<std::vector<std::string>> aliases;
};

class HeuristicLexicon {
 public:
  // pattern: increase, decrease, peak, flat, dip; locate: beginning, middle,
  // end, throughout.
  HeuristicLexicon();
  HeuristicLexicon(std::vector<KeywordGroup> patterns, std::vector<KeywordGroup> locates);

  const std::vector<KeywordGroup>& patterns() const { return patterns_; }
  const std::vector<KeywordGroup>& locates() const { return locates_; }

  // Distinct group ids whose aliases occur in the words.
  std::vector<int> pattern_hits(const std::vector<std::string>& words) const;
  std::vector<int> locate_hits(const std::vector<std::string>& words) const;

  // (pattern id, locate id) when exactly one pattern keyword and exactly one
  // locate keyword occur.
  std::optional<std::pair<int, int>> label(const std::string& caption) const;

  // Oracle reading of a caption: trend from increase / decrease / dip,
  // location from beginning / middle / end. Other keywords give no reading.
  std::optional<SynthClass> oracle(const std::string& caption) const;

  // Pattern ids whose oracle trend is t (e.g. decrease and dip).
  std::vector<int> pattern_ids_for(Trend t) const;
  int locate_id_for(Location l) const;

 private:
  std::vector<KeywordGroup> patterns_;
  std::vector<KeywordGroup> locates_;
};

}  // namespace truce::data
