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

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace truce::data {

inline constexpr int kPad = 0;
inline constexpr int kBos = 1;
inline constexpr int kEos = 2;
inline constexpr int kUnk = 3;
// BOS + content + EOS
inline constexpr int kMaxCaptionIds = 16;

// Lowercases and splits on whitespace; every punctuation character becomes a
// token of its own. Letters, digits, apostrophes and hyphens inside a word
// stay attached.
std::vector<std::string> split_words(std::string_view text);

class Vocabulary {
 public:
  Vocabulary();  // the four reserved tokens only
  explicit Vocabulary(std::vector<std::string> tokens);  // must start with the reserved tokens

  int size() const { return static_cast<int>(tokens_.size()); }
  int id(std::string_view token) const;  // kUnk when absent
  const std::string& token(int id) const;
  const std::vector<std::string>& tokens() const { return tokens_; }

  // BOS, content ids (truncated), EOS. Throws ArgumentError on an empty caption.
  std::vector<int> encode(std::string_view text) const;
  // Content tokens joined by spaces; sentinels and padding dropped.
  std::string decode(const std::vector<int>& ids) const;

  bool operator==(const Vocabulary& o) const { return tokens_ == o.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, int, std::less<>> index_;
};

// Reserved tokens followed by every token of the given captions, sorted.
Vocabulary build_vocab(const std::vector<std::string>& captions);

}  // namespace truce::data
