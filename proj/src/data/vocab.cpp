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

#include "truce/data/vocab.hpp"

#include <cctype>
#include <set>

#include "truce/util/error.hpp"

namespace truce::data {
namespace {

const char* const kReserved[] = {"<pad>", "<bos>", "<eos>", "<unk>"};

bool word_char(unsigned char c) { return std::isalnum(c) || c == '\'' || c == '-' || c >= 0x80; }

}  // namespace

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      flush();
    } else if (word_char(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
      out.emplace_back(1, static_cast<char>(c));
    }
  }
  flush();
  return out;
}

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string>(std::begin(kReserved), std::end(kReserved))) {}

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  for (int i = 0; i < 4; ++i)
    if (static_cast<int>(tokens_.size()) <= i || tokens_[i] != kReserved[i])
      throw SchemaError("vocabulary must start with <pad> <bos> <eos> <unk>");
  for (int i = 0; i < size(); ++i)
    if (!index_.emplace(tokens_[i], i).second) throw SchemaError("duplicate vocabulary token '" + tokens_[i] + "'");
}

int Vocabulary::id(std::string_view token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || id >= size()) throw ArgumentError("token id " + std::to_string(id) + " outside vocabulary of " + std::to_string(size()));
  return tokens_[id];
}

std::vector<int> Vocabulary::encode(std::string_view text) const {
  const auto words = split_words(text);
  if (words.empty()) throw ArgumentError("empty caption");
  std::vector<int> ids{kBos};
  for (const auto& w : words) {
    if (static_cast<int>(ids.size()) == kMaxCaptionIds - 1) break;
    ids.push_back(id(w));
  }
  ids.push_back(kEos);
  return ids;
}

std::string Vocabulary::decode(const std::vector<int>& ids) const {
  std::string out;
  for (int i : ids) {
    if (i == kPad || i == kBos) continue;
    if (i == kEos) break;
    if (!out.empty()) out += ' ';
    out += token(i);
  }
  return out;
}

Vocabulary build_vocab(const std::vector<std::string>& captions) {
  std::set<std::string> seen;
  for (const auto& c : captions)
    for (auto& w : split_words(c)) seen.insert(std::move(w));
  std::vector<std::string> tokens(std::begin(kReserved), std::end(kReserved));
  // split_words never yields "<...>" tokens, so no clash with the reserved ones
  tokens.insert(tokens.end(), seen.begin(), seen.end());
  return Vocabulary(std::move(tokens));
}

}  // namespace truce::data
