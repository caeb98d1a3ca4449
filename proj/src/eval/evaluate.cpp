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

#include "truce/eval/evaluate.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "truce/eval/metrics.hpp"
#include "truce/util/error.hpp"
#include "truce/util/parallel.hpp"

namespace truce::inline TRUCE_PRECISION::eval {

using nlohmann::json;

namespace {

const data::HeuristicLexicon& lexicon() {
  static const data::HeuristicLexicon lex;
  return lex;
}

const data::PatternMeta& require_meta(const data::Instance* inst) {
  if (!inst->meta) throw ArgumentError("instance " + inst->id + " has no pattern metadata; correctness needs SYNTH data");
  return *inst->meta;
}

metrics::References references(const data::Instance* inst) {
  metrics::References r;
  for (const std::string& c : inst->captions) r.push_back(data::split_words(c));
  if (r.empty()) throw ArgumentError("instance " + inst->id + " has no reference captions");
  return r;
}

std::string join(const std::vector<std::string>& words) {
  std::string s;
  for (const std::string& w : words) s += (s.empty() ? "" : " ") + w;
  return s;
}

bool is_word(const std::string& w) {
  return std::any_of(w.begin(), w.end(), [](unsigned char c) { return std::isalnum(c); });
}

std::string module_name(const train::TrainedModel& tm, bool pattern, int id) {
  const auto& lex = lexicon();
  const auto& groups = pattern ? lex.patterns() : lex.locates();
  if (tm.anchored() && id < static_cast<int>(groups.size())) return groups[id].keyword;
  return (pattern ? "pattern" : "locate") + std::to_string(id);
}

}  // namespace

json to_json(const MetricReport& r) {
  json recs = json::array();
  for (const auto& x : r.records) {
    json j{{"id", x.id}, {"caption", x.caption}};
    if (x.program >= 0) {
      j["program"] = x.program;
      j["score"] = x.score;
    }
    if (x.correct) j["correct"] = *x.correct;
    recs.push_back(std::move(j));
  }
  json j{{"instances", r.instances}, {"bleu3", r.bleu3}, {"bleu4", r.bleu4},        {"rougeL", r.rouge_l},
         {"cider", r.cider},         {"perplexity", r.perplexity}, {"correctness", nullptr}, {"records", recs}};
  if (r.correctness) j["correctness"] = *r.correctness;
  return j;
}

bool oracle_correct(const data::HeuristicLexicon& lex, const std::string& caption, const data::PatternMeta& meta) {
  const auto r = lex.oracle(caption);
  return r && r->trend == meta.trend && r->location == meta.location;
}

double perplexity(const train::TrainedModel& tm, const Instances& instances, unsigned threads) {
  std::vector<double> ll(instances.size(), 0.0);
  std::vector<long> tokens(instances.size(), 0);
  parallel_for(instances.size(), threads, [&](std::size_t i) {
    for (const std::string& c : instances[i]->captions) {
      if (data::split_words(c).empty()) continue;
      const auto ids = tm.vocab.encode(c);
      ll[i] += tm.model.loglik(tm.params, instances[i]->series, ids);
      tokens[i] += static_cast<long>(ids.size()) - 1;
    }
  });
  double sum_ll = 0.0;
  long sum_tok = 0;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    sum_ll += ll[i];
    sum_tok += tokens[i];
  }
  if (sum_tok == 0) throw ArgumentError("perplexity: no captions");
  return std::exp(-sum_ll / static_cast<double>(sum_tok));
}

MetricReport evaluate_metrics(const train::TrainedModel& tm, const Instances& instances, unsigned threads) {
  MetricReport rep;
  rep.instances = static_cast<int>(instances.size());
  if (instances.empty()) return rep;
  const bool meta = std::all_of(instances.begin(), instances.end(), [](auto* i) { return i->meta.has_value(); });
  std::vector<metrics::Tokens> cands(instances.size());
  std::vector<metrics::References> refs(instances.size());
  rep.records.resize(instances.size());
  parallel_for(instances.size(), threads, [&](std::size_t i) {
    const data::Instance* inst = instances[i];
    const train::Caption c = tm.model.greedy(tm.params, inst->series);
    cands[i] = tm.words(c.ids);
    refs[i] = references(inst);
    InstanceRecord rec{inst->id, join(cands[i]), c.program, c.score, std::nullopt};
    if (meta) rec.correct = oracle_correct(lexicon(), rec.caption, *inst->meta);
    rep.records[i] = std::move(rec);
  });
  rep.bleu3 = metrics::bleu(cands, refs, 3);
  rep.bleu4 = metrics::bleu(cands, refs, 4);
  rep.rouge_l = metrics::rouge_l(cands, refs);
  rep.cider = metrics::cider(cands, refs);
  rep.perplexity = perplexity(tm, instances, threads);
  if (meta) {
    const auto correct = std::count_if(rep.records.begin(), rep.records.end(), [](const auto& r) { return *r.correct; });
    rep.correctness = static_cast<double>(correct) / instances.size();
  }
  return rep;
}

double correctness(const train::TrainedModel& tm, const Instances& instances, unsigned threads) {
  if (instances.empty()) throw ArgumentError("correctness: no instances");
  for (const data::Instance* inst : instances) require_meta(inst);
  std::vector<char> ok(instances.size(), 0);
  parallel_for(instances.size(), threads, [&](std::size_t i) {
    const std::string cap = join(tm.words(tm.model.greedy(tm.params, instances[i]->series).ids));
    ok[i] = oracle_correct(lexicon(), cap, *instances[i]->meta);
  });
  return static_cast<double>(std::count(ok.begin(), ok.end(), 1)) / instances.size();
}

std::vector<CoveragePoint> coverage_curve(const train::TrainedModel& tm, const Instances& instances, int L,
                                          const std::vector<double>& top_ps, std::uint64_t seed, unsigned threads) {
  if (L < 1) throw ArgumentError("coverage: L must be >= 1");
  if (instances.empty()) throw ArgumentError("coverage: no instances");
  const bool meta = std::all_of(instances.begin(), instances.end(), [](auto* i) { return i->meta.has_value(); });
  std::vector<CoveragePoint> out;
  for (double p : top_ps) {
    std::vector<int> correct(instances.size(), 0), covered(instances.size(), 0), refs(instances.size(), 0);
    parallel_for(instances.size(), threads, [&](std::size_t i) {
      const data::Instance* inst = instances[i];
      Rng rng(Rng::derive(seed, inst->id));
      std::set<std::pair<data::Trend, data::Location>> seen;
      for (int l = 0; l < L; ++l) {
        const std::string cap = join(tm.words(tm.model.sample(tm.params, inst->series, p, rng).ids));
        if (const auto r = lexicon().oracle(cap)) seen.insert({r->trend, r->location});
        if (meta) correct[i] += oracle_correct(lexicon(), cap, *inst->meta);
      }
      for (const std::string& ref : inst->captions) {
        ++refs[i];
        const auto r = lexicon().oracle(ref);
        covered[i] += r && seen.count({r->trend, r->location});
      }
    });
    CoveragePoint pt;
    pt.top_p = p;
    pt.samples = L * static_cast<int>(instances.size());
    const auto sum = [](const std::vector<int>& v) { return std::accumulate(v.begin(), v.end(), 0); };
    if (meta) pt.correctness = static_cast<double>(sum(correct)) / pt.samples;
    pt.coverage = sum(refs) ? static_cast<double>(sum(covered)) / sum(refs) : 0.0;
    out.push_back(pt);
  }
  return out;
}

WordTables module_word_table(const train::TrainedModel& tm, const Instances& instances, WordSource source,
                             const std::vector<std::string>& stopwords, int top_k) {
  if (!tm.model.program_model()) throw ArgumentError("word tables need a program model");
  const auto& space = tm.model.space();
  const int nP = space.config().n_pattern, nL = space.config().n_locate;
  std::vector<std::map<std::string, int>> pcount(nP), lcount(nL);
  auto attach = [&](int z, const std::string& caption) {
    for (const std::string& w : data::split_words(caption)) {
      if (!is_word(w) || std::binary_search(stopwords.begin(), stopwords.end(), w)) continue;
      ++pcount[space.pattern_of(z)][w];
      ++lcount[space.locate_of(z)][w];
    }
  };
  for (const data::Instance* inst : instances) {
    if (source == WordSource::prior) {
      const auto p = tm.model.prior(tm.params, inst->series);
      const int z = static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
      for (const std::string& c : inst->captions) attach(z, c);
    } else {
      for (const std::string& c : inst->captions)
        if (!data::split_words(c).empty()) attach(tm.model.infer_program(tm.params, tm.vocab.encode(c)), c);
    }
  }
  auto ranked = [&](const std::map<std::string, int>& m) {
    std::vector<std::pair<std::string, int>> v(m.begin(), m.end());
    std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    if (static_cast<int>(v.size()) > top_k) v.resize(top_k);
    return v;
  };
  WordTables t;
  for (int i = 0; i < nP; ++i) t.pattern.push_back({module_name(tm, true, i), ranked(pcount[i])});
  for (int j = 0; j < nL; ++j) t.locate.push_back({module_name(tm, false, j), ranked(lcount[j])});
  return t;
}

json to_json(const WordTables& t) {
  auto side = [](const std::vector<ModuleWords>& v) {
    json a = json::array();
    for (const auto& m : v) {
      json words = json::array();
      for (const auto& [w, n] : m.words) words.push_back({w, n});
      a.push_back({{"module", m.module}, {"words", words}});
    }
    return a;
  };
  return {{"pattern", side(t.pattern)}, {"locate", side(t.locate)}};
}

CompositionResult composition_eval(const train::TrainedModel& tm, const Instances& instances) {
  if (!tm.model.program_model()) throw ArgumentError("composition needs a program model");
  if (!tm.anchored())
    throw ArgumentError("composition needs anchored modules: train with heuristic labels (w_aux > 0)");
  if (instances.empty()) throw ArgumentError("composition: no instances");
  const auto& lex = lexicon();
  const auto& space = tm.model.space();
  CompositionResult r;
  r.chance = 1.0 / space.size();
  std::map<std::string, std::pair<int, int>> per;
  int hits = 0;
  for (const data::Instance* inst : instances) {
    const data::PatternMeta& meta = require_meta(inst);
    num::Tape tape(false);
    const auto& s = tm.model.scores(tape, tm.params, inst->series).value().storage();
    const int z = static_cast<int>(std::max_element(s.begin(), s.end()) - s.begin());
    const auto pats = lex.pattern_ids_for(meta.trend);
    const bool ok = std::find(pats.begin(), pats.end(), space.pattern_of(z)) != pats.end() &&
                    space.locate_of(z) == lex.locate_id_for(meta.location);
    hits += ok;
    auto& [h, n] = per[data::class_name({meta.trend, meta.location})];
    h += ok;
    ++n;
  }
  r.instances = static_cast<int>(instances.size());
  r.accuracy = static_cast<double>(hits) / r.instances;
  for (const auto& [k, v] : per) r.per_class[k] = static_cast<double>(v.first) / v.second;
  return r;
}

json to_json(const CompositionResult& r) {
  return {{"instances", r.instances}, {"accuracy", r.accuracy}, {"chance", r.chance}, {"per_class", r.per_class}};
}

void write_coverage_svg(const std::filesystem::path& path,
                        const std::vector<std::pair<std::string, std::vector<CoveragePoint>>>& systems,
                        const std::string& provenance) {
  constexpr double W = 480, H = 360, M = 50;
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  auto px = [&](double cov) { return M + cov * (W - 2 * M); };
  auto py = [&](double cor) { return H - M - cor * (H - 2 * M); };
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" "
    << "font-size=\"12\">\n";
  if (!provenance.empty()) {
    std::string text = provenance;
    // "--" may not appear inside an XML comment
    for (std::size_t at = 0; (at = text.find("--", at)) != std::string::npos;) text.replace(at, 2, "- -");
    s << "<!--\n" << text << "\n-->\n";
  }
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<line x1=\"" << M << "\" y1=\"" << H - M << "\" x2=\"" << W - M << "\" y2=\"" << H - M << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << M << "\" y1=\"" << M << "\" x2=\"" << M << "\" y2=\"" << H - M << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = k / 4.0;
    s << "<text x=\"" << px(v) << "\" y=\"" << H - M + 16 << "\" text-anchor=\"middle\">" << v << "</text>\n";
    s << "<text x=\"" << M - 6 << "\" y=\"" << py(v) + 4 << "\" text-anchor=\"end\">" << v << "</text>\n";
  }
  s << "<text x=\"" << W / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">coverage</text>\n";
  s << "<text x=\"14\" y=\"" << H / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 " << H / 2
    << ")\">correctness</text>\n";
  for (std::size_t i = 0; i < systems.size(); ++i) {
    const char* col = colors[i % 5];
    std::ostringstream pts;
    for (const auto& p : systems[i].second) {
      if (!p.correctness) continue;
      pts << px(p.coverage) << "," << py(*p.correctness) << " ";
      s << "<circle cx=\"" << px(p.coverage) << "\" cy=\"" << py(*p.correctness) << "\" r=\"3\" fill=\"" << col
        << "\"><title>top_p " << p.top_p << "</title></circle>\n";
    }
    s << "<polyline fill=\"none\" stroke=\"" << col << "\" points=\"" << pts.str() << "\"/>\n";
    s << "<text x=\"" << W - M - 90 << "\" y=\"" << M + 16 * i << "\" fill=\"" << col << "\">" << systems[i].first
      << "</text>\n";
  }
  s << "</svg>\n";
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << s.str();
}

}  // namespace truce::inline TRUCE_PRECISION::eval
