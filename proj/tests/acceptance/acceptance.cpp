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

// Acceptance runner: trains the reference models on SYNTH and checks every
// release criterion, one PASS/FAIL line each. Exit status 1 if any fails.
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <chrono>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <optional>
#include <set>

#include "truce/data/dataset.hpp"
#include "truce/data/lexicon.hpp"
#include "truce/eval/evaluate.hpp"
#include "truce/eval/metrics.hpp"
#include "truce/train/trainer.hpp"
#include "unit/metric_examples.hpp"
#include "unit/network_gradients.hpp"

using namespace truce;
namespace tt = truce::train;
using Clock = std::chrono::steady_clock;

namespace {

constexpr std::uint64_t kDataSeed = 1;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string pct(double v) { return fmt::format("{:.1f}%", 100.0 * v); }

eval::Instances all_of(const data::Dataset& ds) {
  eval::Instances v;
  for (const auto& i : ds.instances) v.push_back(&i);
  return v;
}

struct Trained {
  tt::TrainResult result;
  tt::TrainedModel model;
  double seconds = 0.0;
};

// Trainings shared between criteria, built on first use.
class Fixtures {
 public:
  const data::Dataset& synth() { return get(synth_, [] { return data::gen_synth_dataset(720, 12, data::all_classes(), kDataSeed); }); }
  const data::Dataset& synth24() {
    return get(synth24_, [] { return data::gen_synth_dataset(100, 24, data::all_classes(), kDataSeed + 24); });
  }
  const data::Dataset& four() {
    return get(four_, [] { return data::gen_synth_dataset(720, 12, data::composition_train_classes(), kDataSeed); });
  }
  const data::Dataset& heldout() {
    return get(heldout_, [] { return data::gen_synth_dataset(100, 12, data::composition_heldout_classes(), kDataSeed + 2); });
  }
  const Trained& truce() { return get(truce_, [&] { return fit(tt::ModelKind::truce, synth()); }); }
  const Trained& conv() { return get(conv_, [&] { return fit(tt::ModelKind::conv, synth()); }); }
  const Trained& fc() { return get(fc_, [&] { return fit(tt::ModelKind::fc, synth()); }); }
  const Trained& truce_four() { return get(truce_four_, [&] { return fit(tt::ModelKind::truce, four()); }); }

  static Trained fit(tt::ModelKind kind, const data::Dataset& ds) {
    tt::ModelConfig mc;
    mc.kind = kind;
    std::printf("  training %s on %zu series...\n", std::string(tt::to_string(kind)).c_str(), ds.instances.size());
    std::fflush(stdout);
    const auto t0 = Clock::now();
    auto res = tt::train(mc, tt::TrainConfig{}, ds);
    const double secs = since(t0);
    auto model = tt::TrainedModel::from_checkpoint(res.checkpoint);
    Trained t{std::move(res), std::move(model), secs};
    std::printf("  done in %.0fs (best dev Bleu-4 %.4f at epoch %d)\n", t.seconds, t.result.best_dev_bleu4,
                t.result.best_epoch);
    return t;
  }

 private:
  template <class T, class F>
  const T& get(std::optional<T>& slot, F make) {
    if (!slot) slot.emplace(make());
    return *slot;
  }
  std::optional<data::Dataset> synth_, synth24_, four_, heldout_;
  std::optional<Trained> truce_, conv_, fc_, truce_four_;
};

struct Outcome {
  bool pass;
  std::string detail;
};

Outcome gradients() {
  const auto t0 = Clock::now();
  std::string worst;
  bool ok = true;
  double max_rel = 0.0;
  for (const auto& name : gradsuite::network_names()) {
    const auto r = gradsuite::check_network(name, 20, 2024);
    ok = ok && r.failed_instances == 0 && r.instances >= 20;
    if (r.max_rel >= max_rel) {
      max_rel = r.max_rel;
      worst = name;
    }
    std::printf("  %-14s %d instances, %d failed, max rel err %.2e\n", name.c_str(), r.instances, r.failed_instances,
                r.max_rel);
  }
  const double s = since(t0);
  return {ok && s < 120.0, fmt::format("{} networks, max rel err {:.2e} ({}), {:.0f}s", gradsuite::network_names().size(),
                                       max_rel, worst, s)};
}

Outcome synth_end_to_end(Fixtures& f) {
  const auto& t = f.truce();
  const double c = eval::correctness(t.model, f.synth().split(data::Split::test));
  return {c >= 0.85 && t.seconds <= 3600.0, fmt::format("test correctness {} (need >= 85%), trained in {:.0f}s", pct(c), t.seconds)};
}

Outcome baseline_gap(Fixtures& f) {
  const auto test = f.synth().split(data::Split::test);
  const double ct = eval::correctness(f.truce().model, test);
  const double cc = eval::correctness(f.conv().model, test);
  const auto& tm = f.truce().model;
  const auto& cm = f.conv().model;
  const double nt = static_cast<double>(tm.model.prediction_parameters(tm.params));
  const double nc = static_cast<double>(cm.model.prediction_parameters(cm.params));
  const double dev = std::abs(nc - nt) / nt;
  return {ct - cc >= 0.20 && dev <= 0.02,
          fmt::format("truce {} vs conv {}: gap {:.1f} points (need >= 20); parameters {} vs {} ({:+.2f}%)", pct(ct),
                      pct(cc), 100.0 * (ct - cc), nt, nc, 100.0 * (nc - nt) / nt)};
}

Outcome length_transfer(Fixtures& f) {
  const auto test = f.synth().split(data::Split::test);
  const auto t24 = all_of(f.synth24());
  const double t12 = eval::correctness(f.truce().model, test);
  const double t24c = eval::correctness(f.truce().model, t24);
  const double f12 = eval::correctness(f.fc().model, test);
  const double f24 = eval::correctness(f.fc().model, t24);
  const bool ok = t24c >= 0.85 && t12 - t24c <= 0.10 && f12 - f24 >= 0.20;
  return {ok, fmt::format("truce T=12 {} -> T=24 {} (drop {:.1f}, need >= 85% and <= 10); fc {} -> {} (drop {:.1f}, "
                          "need >= 20)",
                          pct(t12), pct(t24c), 100.0 * (t12 - t24c), pct(f12), pct(f24), 100.0 * (f12 - f24))};
}

Outcome compositionality(Fixtures& f) {
  const auto r = eval::composition_eval(f.truce_four().model, all_of(f.heldout()));
  std::string per;
  for (const auto& [k, v] : r.per_class) per += fmt::format(" {} {}", k, pct(v));
  return {r.accuracy >= 0.80, fmt::format("held-out accuracy {} over {} series (need >= 80%, chance {});{}", pct(r.accuracy),
                                          r.instances, pct(r.chance), per)};
}

Outcome identities(Fixtures& f) {
  tt::ProbeStats st;
  int epochs = 0;
  bool every = true;
  for (const Trained* t : {&f.truce(), &f.truce_four()})
    for (const auto& rec : t->result.log) {
      ++epochs;
      if (!rec.probe) {
        every = false;
        continue;
      }
      st.merge(*rec.probe);
    }
  return {every && epochs > 0 && st.holds(),
          fmt::format("{} epochs, {} probe pairs: min kl {:.2e}, max elbo - marginal {:.2e}, posterior gap {:.2e}, "
                      "prior sum dev {:.2e}, scores [{:.4f}, {:.4f}], locate [{:.4f}, {:.4f}]",
                      epochs, st.pairs, st.min_kl, st.max_elbo_excess, st.max_posterior_gap, st.max_prior_dev,
                      st.min_score, st.max_score, st.min_locate, st.max_locate)};
}

Outcome metric_oracles() {
  int ok = 0, n = 0;
  std::string bad;
  for (const auto& e : metric_examples::worked_examples()) {
    const double got = e.compute();
    ++n;
    const bool exact = e.name.find("identical") != std::string::npos && e.expected == 1.0;
    const bool pass = exact ? got == 1.0 : std::abs(got - e.expected) < 5e-5;
    ok += pass;
    if (!pass) bad += fmt::format(" {}={:.6f}/{:.6f}", e.name, got, e.expected);
  }
  return {ok == n, fmt::format("{}/{} worked examples match{}", ok, n, bad)};
}

Outcome tagging(Fixtures& f) {
  const data::HeuristicLexicon lex;
  const nmn::ProgramSpace space{nmn::ProgramSpaceConfig{}};
  auto fraction = [&](const data::Dataset& ds) {
    long tagged = 0, total = 0;
    for (const auto& i : ds.instances)
      for (const auto& c : i.captions) {
        ++total;
        tagged += tt::heuristic_program(lex, space, c).has_value();
      }
    return std::pair{tagged, total};
  };
  if (const char* stock = std::getenv("TRUCE_STOCK_CORPUS"); stock && std::filesystem::exists(stock)) {
    const auto ds = data::convert_released(stock, kDataSeed);
    const auto [t, n] = fraction(ds);
    const double r = double(t) / n;
    return {r >= 0.23 && r <= 0.39, fmt::format("released STOCK corpus: {} of {} captions tagged ({}, need 23-39%)", t, n, pct(r))};
  }
  const auto [t, n] = fraction(f.synth());
  return {t == n && n > 0, fmt::format("no STOCK corpus; SYNTH templates: {} of {} captions tagged", t, n)};
}

Outcome coverage(Fixtures& f) {
  const auto test = f.synth().split(data::Split::test);
  const auto ct = eval::coverage_curve(f.truce().model, test, 12, eval::kDefaultTopP, kDataSeed);
  const auto cc = eval::coverage_curve(f.conv().model, test, 12, eval::kDefaultTopP, kDataSeed);
  bool mono = true;
  std::string curve;
  for (std::size_t k = 0; k < ct.size(); ++k) {
    curve += fmt::format(" p={:.1f}: truce cov {} cor {} / conv cov {} cor {};", ct[k].top_p, pct(ct[k].coverage),
                         pct(*ct[k].correctness), pct(cc[k].coverage), pct(*cc[k].correctness));
    if (k > 0) {
      mono = mono && *ct[k].correctness <= *ct[k - 1].correctness + 0.02;
      mono = mono && ct[k].coverage >= ct[k - 1].coverage - 0.02;
    }
  }
  // compare where coverage is matched; without a point within 5, the closest one
  std::vector<std::size_t> matched;
  std::size_t closest = 0;
  for (std::size_t k = 0; k < ct.size(); ++k) {
    const double d = std::abs(ct[k].coverage - cc[k].coverage);
    if (d <= 0.05) matched.push_back(k);
    if (d < std::abs(ct[closest].coverage - cc[closest].coverage)) closest = k;
  }
  const bool any = !matched.empty();
  if (!any) matched.push_back(closest);
  bool higher = true;
  for (std::size_t k : matched) higher = higher && *ct[k].correctness > *cc[k].correctness;
  std::string where;
  for (std::size_t k : matched) where += fmt::format(" {:.1f}", ct[k].top_p);
  // informational: each conv point against the truce point of closest coverage, any top_p
  std::string across;
  for (const auto& c : cc) {
    const auto t = std::min_element(ct.begin(), ct.end(), [&](const auto& a, const auto& b) {
      return std::abs(a.coverage - c.coverage) < std::abs(b.coverage - c.coverage);
    });
    if (std::abs(t->coverage - c.coverage) <= 0.05)
      across += fmt::format(" conv p={:.1f} cor {} vs truce p={:.1f} cor {};", c.top_p, pct(*c.correctness), t->top_p,
                            pct(*t->correctness));
  }
  if (!across.empty()) curve += " across top_p at matched coverage:" + across;
  return {mono && higher, fmt::format("monotone within 2 points: {}; truce more correct at matched coverage ({}top_p{}): "
                                      "{};{}",
                                      mono ? "yes" : "no", any ? "" : "closest ", where, higher ? "yes" : "no", curve)};
}

Outcome determinism(Fixtures& f) {
  const auto& a = f.truce();
  const Trained b = Fixtures::fit(tt::ModelKind::truce, f.synth());
  const std::string bytes = tt::serialize_checkpoint(a.result.checkpoint);
  const bool same = bytes == tt::serialize_checkpoint(b.result.checkpoint);

  const auto path = std::filesystem::temp_directory_path() / "truce_acceptance.ckpt";
  tt::save_checkpoint(a.result.checkpoint, path);
  const auto loaded = tt::TrainedModel::load(path);
  std::filesystem::remove(path);
  int equal = 0, n = 0;
  for (const auto& inst : f.synth().instances) {
    if (n == 100) break;
    const auto x = a.model.model.greedy(a.model.params, inst.series);
    const auto y = loaded.model.greedy(loaded.params, inst.series);
    ++n;
    equal += x.ids == y.ids && x.program == y.program;
  }
  return {same && equal == 100, fmt::format("repeat training {} ({} bytes); reloaded greedy captions equal on {}/{}",
                                            same ? "byte-identical" : "differs", bytes.size(), equal, n)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> only;
  app.add_option("--only", only, "Criteria to run (default: all)")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::warn);

  Fixtures f;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gradient correctness", gradients},
      {"SYNTH end-to-end", [&] { return synth_end_to_end(f); }},
      {"baseline gap", [&] { return baseline_gap(f); }},
      {"length transfer", [&] { return length_transfer(f); }},
      {"compositionality", [&] { return compositionality(f); }},
      {"variational identities", [&] { return identities(f); }},
      {"metric oracles", metric_oracles},
      {"heuristic tagging", [&] { return tagging(f); }},
      {"coverage-correctness", [&] { return coverage(f); }},
      {"determinism and persistence", [&] { return determinism(f); }},
  };
  const std::set<int> chosen(only.begin(), only.end());
  int failed = 0, run = 0;
  const auto t0 = Clock::now();
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!chosen.empty() && !chosen.count(id)) continue;
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    ++run;
    failed += !o.pass;
    std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, criteria[k].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed in %.0fs\n", run - failed, run, since(t0));
  return failed == 0 ? 0 : 1;
}
