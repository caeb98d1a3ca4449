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

#include "truce/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "truce/util/error.hpp"
#include "truce/version.hpp"

namespace truce::metrics {

namespace {

using NgramCounts = std::map<std::vector<std::string>, int>;

NgramCounts ngrams(const Tokens& s, int n) {
  NgramCounts out;
  for (std::size_t i = 0; i + n <= s.size(); ++i) ++out[Tokens(s.begin() + i, s.begin() + i + n)];
  return out;
}

void check_aligned(const std::vector<Tokens>& c, const std::vector<References>& r) {
  if (c.size() != r.size())
    throw ArgumentError("metrics: " + std::to_string(c.size()) + " candidates but " + std::to_string(r.size()) +
                        " reference sets");
  for (const References& refs : r)
    if (refs.empty()) throw ArgumentError("metrics: every candidate needs at least one reference");
}

std::size_t lcs(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace

double bleu(const std::vector<Tokens>& candidates, const std::vector<References>& references, int n) {
  check_aligned(candidates, references);
  if (n < 1) throw ArgumentError("bleu: order must be >= 1");
  std::vector<double> matched(n, 0.0), total(n, 0.0);
  double cand_len = 0.0, ref_len = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const Tokens& c = candidates[i];
    cand_len += static_cast<double>(c.size());
    std::size_t best = references[i][0].size();
    for (const Tokens& r : references[i]) {
      const auto d = [&](std::size_t len) { return len > c.size() ? len - c.size() : c.size() - len; };
      if (d(r.size()) < d(best) || (d(r.size()) == d(best) && r.size() < best)) best = r.size();
    }
    ref_len += static_cast<double>(best);
    for (int k = 1; k <= n; ++k) {
      const NgramCounts cc = ngrams(c, k);
      NgramCounts max_ref;
      for (const Tokens& r : references[i])
        for (const auto& [g, cnt] : ngrams(r, k)) max_ref[g] = std::max(max_ref[g], cnt);
      for (const auto& [g, cnt] : cc) {
        total[k - 1] += cnt;
        const auto it = max_ref.find(g);
        if (it != max_ref.end()) matched[k - 1] += std::min(cnt, it->second);
      }
    }
  }
  if (cand_len == 0.0) return 0.0;
  double log_p = 0.0;
  for (int k = 0; k < n; ++k) {
    const double p = total[k] > 0.0 ? matched[k] / total[k] : 0.0;
    log_p += std::log(std::max(p, kBleuEpsilon)) / n;
  }
  const double bp = cand_len < ref_len ? std::exp(1.0 - ref_len / cand_len) : 1.0;
  return bp * std::exp(log_p);
}

double rouge_l(const std::vector<Tokens>& candidates, const std::vector<References>& references) {
  check_aligned(candidates, references);
  if (candidates.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    double best = 0.0;
    for (const Tokens& r : references[i]) {
      const double l = static_cast<double>(lcs(candidates[i], r));
      if (l == 0.0) continue;
      const double p = l / candidates[i].size(), rec = l / r.size();
      best = std::max(best, 2.0 * p * rec / (p + rec));
    }
    sum += best;
  }
  return sum / candidates.size();
}

double cider(const std::vector<Tokens>& candidates, const std::vector<References>& references) {
  check_aligned(candidates, references);
  if (candidates.empty()) return 0.0;
  constexpr int kOrders = 4;
  const double N = static_cast<double>(candidates.size());
  double sum = 0.0;
  for (int n = 1; n <= kOrders; ++n) {
    // document frequency: number of reference sets containing the n-gram
    std::map<std::vector<std::string>, int> df;
    for (const References& refs : references) {
      std::set<std::vector<std::string>> seen;
      for (const Tokens& r : refs)
        for (const auto& [g, cnt] : ngrams(r, n)) seen.insert(g);
      for (const auto& g : seen) ++df[g];
    }
    auto vec = [&](const Tokens& s) {
      std::map<std::vector<std::string>, double> v;
      for (const auto& [g, cnt] : ngrams(s, n)) {
        const auto it = df.find(g);
        const double idf = std::log(N / std::max(1.0, it == df.end() ? 0.0 : double(it->second)));
        v[g] = cnt * idf;
      }
      return v;
    };
    auto norm = [](const std::map<std::vector<std::string>, double>& v) {
      double s = 0.0;
      for (const auto& [g, x] : v) s += x * x;
      return std::sqrt(s);
    };
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const auto vc = vec(candidates[i]);
      const double nc = norm(vc);
      double acc = 0.0;
      for (const Tokens& r : references[i]) {
        const auto vr = vec(r);
        const double nr = norm(vr);
        if (nc == 0.0 || nr == 0.0) continue;
        double dot = 0.0;
        for (const auto& [g, x] : vc) {
          const auto it = vr.find(g);
          if (it != vr.end()) dot += x * it->second;
        }
        acc += dot / (nc * nr);
      }
      sum += acc / references[i].size() / kOrders;
    }
  }
  return kCiderScale * sum / N;
}

namespace {

std::vector<std::string> read_words(std::istream& in) {
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<std::string> load_stopwords(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot read stop-word list " + path);
  return read_words(in);
}

std::vector<std::string> default_stopwords() {
  std::istringstream in(kStopwordsText);
  return read_words(in);
}

}  // namespace truce::metrics
