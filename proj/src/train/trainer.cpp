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

#include "truce/train/trainer.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "truce/eval/metrics.hpp"
#include "truce/numerics/adam.hpp"
#include "truce/train/objective.hpp"
#include "truce/util/error.hpp"
#include "truce/version.hpp"

namespace truce::inline TRUCE_PRECISION::train {

using nlohmann::json;
using num::real;

json to_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate},
          {"w_aux", c.w_aux},
          {"lambda_sweep", c.lambda_sweep},
          {"w_aux_sweep", c.w_aux_sweep},
          {"direct_conditioning", c.direct_conditioning},
          {"no_inference_net", c.no_inference_net},
          {"no_heuristic", c.no_heuristic},
          {"patience", c.patience},
          {"probe_size", c.probe_size},
          {"dev_limit", c.dev_limit},
          {"seed", c.seed}};
}

TrainConfig train_config_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("train config must be an object");
  TrainConfig c;
  const json defaults = to_json(c);
  for (const auto& [key, value] : j.items())
    if (!defaults.contains(key)) throw SchemaError("unknown train config key '" + key + "'");
  try {
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
    };
    get("epochs", c.epochs);
    get("batch_size", c.batch_size);
    get("learning_rate", c.learning_rate);
    get("w_aux", c.w_aux);
    get("lambda_sweep", c.lambda_sweep);
    get("w_aux_sweep", c.w_aux_sweep);
    get("direct_conditioning", c.direct_conditioning);
    get("no_inference_net", c.no_inference_net);
    get("no_heuristic", c.no_heuristic);
    get("patience", c.patience);
    get("probe_size", c.probe_size);
    get("dev_limit", c.dev_limit);
    get("seed", c.seed);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("train config: ") + e.what());
  }
  return c;
}

void ProbeStats::merge(const ProbeStats& o) {
  pairs += o.pairs;
  min_kl = std::min(min_kl, o.min_kl);
  max_elbo_excess = std::max(max_elbo_excess, o.max_elbo_excess);
  max_posterior_gap = std::max(max_posterior_gap, o.max_posterior_gap);
  max_prior_dev = std::max(max_prior_dev, o.max_prior_dev);
  min_score = std::min(min_score, o.min_score);
  max_score = std::max(max_score, o.max_score);
  min_locate = std::min(min_locate, o.min_locate);
  max_locate = std::max(max_locate, o.max_locate);
}

bool ProbeStats::holds() const {
  return pairs > 0 && min_kl >= -1e-7 && max_elbo_excess <= 1e-5 && max_posterior_gap < 1e-6 &&
         max_prior_dev <= 1e-6 && min_score > 0.0 && max_score < 1.0 && min_locate > 0.0 && max_locate <= 1.0;
}

namespace {

json probe_json(const ProbeStats& p) {
  return {{"pairs", p.pairs},
          {"min_kl", p.min_kl},
          {"max_elbo_excess", p.max_elbo_excess},
          {"max_posterior_gap", p.max_posterior_gap},
          {"max_prior_dev", p.max_prior_dev},
          {"score_range", {p.min_score, p.max_score}},
          {"locate_range", {p.min_locate, p.max_locate}},
          {"holds", p.holds()}};
}

}  // namespace

json to_json(const EpochRecord& r) {
  json j{{"run", r.run},         {"epoch", r.epoch}, {"lambda", r.lambda},       {"w_aux", r.w_aux},
         {"objective", r.objective}, {"elbo", nullptr}, {"kl", r.kl},       {"aux", r.aux},
         {"dev_objective", r.dev_objective}, {"dev_bleu4", r.dev_bleu4}, {"best", r.best}};
  if (r.elbo) j["elbo"] = *r.elbo;
  if (r.probe) j["probe"] = probe_json(*r.probe);
  return j;
}

std::optional<int> heuristic_program(const data::HeuristicLexicon& lex, const nmn::ProgramSpace& space,
                                     const std::string& caption) {
  const auto l = lex.label(caption);
  if (!l) return std::nullopt;
  return space.program(l->first, l->second);
}

namespace {

struct Pair {
  const data::Instance* inst;
  std::vector<int> ids;
  std::optional<int> label;
};

struct RunOutcome {
  num::ParameterStore params;
  std::vector<EpochRecord> log;
  int best_epoch = 0;
  double best_bleu = -1.0;
  bool diverged = false;
  std::string divergence;
  ProbeStats probe;
};

std::vector<std::string> caption_words(const data::Vocabulary& vocab, const std::vector<int>& ids) {
  std::vector<std::string> w;
  for (int id : ids)
    if (id != data::kBos && id != data::kEos && id != data::kPad) w.push_back(vocab.token(id));
  return w;
}

double dev_bleu4(const Model& model, const num::ParameterStore& ps, const data::Vocabulary& vocab,
                 const std::vector<const data::Instance*>& dev) {
  std::vector<metrics::Tokens> cands;
  std::vector<metrics::References> refs;
  for (const data::Instance* inst : dev) {
    cands.push_back(caption_words(vocab, model.greedy(ps, inst->series).ids));
    metrics::References r;
    for (const std::string& c : inst->captions) r.push_back(data::split_words(c));
    refs.push_back(std::move(r));
  }
  return metrics::bleu(cands, refs, 4);
}

// Mean objective over every (dev series, caption) pair, at fixed parameters.
double dev_objective(const Model& model, const num::ParameterStore& ps, const data::Vocabulary& vocab,
                     const std::vector<const data::Instance*>& dev, const ObjectiveOptions& opt) {
  double sum = 0.0;
  int n = 0;
  for (const data::Instance* inst : dev)
    for (const std::string& c : inst->captions) {
      if (data::split_words(c).empty()) continue;
      num::Tape tape(false);
      sum += model.pair_terms(tape, ps, inst->series, vocab.encode(c), std::nullopt, {opt.use_inference_net, 0.0}).objective;
      ++n;
    }
  return n ? sum / n : 0.0;
}

ProbeStats probe(const Model& model, const num::ParameterStore& ps, const std::vector<Pair>& pairs, int n) {
  ProbeStats st;
  const auto& space = model.space();
  for (int k = 0; k < n && k < static_cast<int>(pairs.size()); ++k) {
    const Pair& p = pairs[k];
    num::Tape tape(false);
    const PairTerms t = model.pair_terms(tape, ps, p.inst->series, p.ids, std::nullopt, {true, 0.0});
    const VariationalCheck c = check_identities(t.log_prior, t.caption_lp, t.log_q);
    ++st.pairs;
    st.min_kl = std::min(st.min_kl, c.kl);
    st.max_elbo_excess = std::max(st.max_elbo_excess, c.elbo - c.marginal);
    st.max_posterior_gap = std::max(st.max_posterior_gap, std::abs(c.elbo_at_posterior - c.marginal));
    const auto prior = model.prior(ps, p.inst->series);
    st.max_prior_dev = std::max(st.max_prior_dev, std::abs(std::accumulate(prior.begin(), prior.end(), 0.0) - 1.0));
    for (real s : model.scores(tape, ps, p.inst->series).value().storage()) {
      st.min_score = std::min(st.min_score, double(s));
      st.max_score = std::max(st.max_score, double(s));
    }
    const int T = static_cast<int>(p.inst->series.size());
    for (int j = 0; j < space.config().n_locate; ++j)
      for (real m : space.locate_forward(tape, ps, j, T).value().storage()) {
        st.min_locate = std::min(st.min_locate, double(m));
        st.max_locate = std::max(st.max_locate, double(m));
      }
  }
  return st;
}

bool all_finite(const num::GradMap& g) {
  return std::all_of(g.begin(), g.end(), [](const auto& kv) { return kv.second.all_finite(); });
}

RunOutcome run_one(const Model& model, const TrainConfig& cfg, double w_aux, int run, const std::vector<Pair>& pairs,
                   const std::vector<const data::Instance*>& dev, const data::Vocabulary& vocab,
                   const EpochCallback& on_epoch) {
  RunOutcome out;
  num::ParameterStore ps;
  Rng init_rng(Rng::derive(cfg.seed, "init"));
  model.init_params(ps, init_rng);
  num::AdamState adam(num::AdamConfig{static_cast<real>(cfg.learning_rate)});
  Rng shuffle_rng(Rng::derive(cfg.seed, "shuffle"));
  const ObjectiveOptions opt{model.program_model() && !cfg.no_inference_net, w_aux};
  const bool has_q = opt.use_inference_net;

  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  out.params = ps;
  int stale = 0;
  for (int epoch = 1; epoch <= cfg.epochs && !out.diverged; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffle_rng.uniform_int(0, static_cast<int>(i) - 1)]);
    double sum_obj = 0.0, sum_kl = 0.0, sum_aux = 0.0, rec_bleu = 0.0, rec_dev_obj = 0.0;
    std::optional<ProbeStats> rec_probe;
    int n_aux = 0, n_seen = 0;
    for (std::size_t b = 0; b < order.size() && !out.diverged; b += cfg.batch_size) {
      const std::size_t e = std::min(order.size(), b + cfg.batch_size);
      const real inv_b = real(1) / static_cast<real>(e - b);
      int n_tag = 0;
      if (w_aux > 0.0)
        for (std::size_t k = b; k < e; ++k) n_tag += pairs[order[k]].label.has_value();
      num::GradMap grads;
      try {
        for (std::size_t k = b; k < e; ++k) {
          const Pair& p = pairs[order[k]];
          num::Tape tape(true);
          const PairTerms t = model.pair_terms(tape, ps, p.inst->series, p.ids, p.label, opt);
          num::Var loss = num::scale(t.loss, inv_b);
          if (t.aux_loss.valid()) {
            loss = num::add(loss, num::scale(t.aux_loss, static_cast<real>(w_aux / n_tag)));
            sum_aux += t.aux;
            ++n_aux;
          }
          if (!std::isfinite(loss.value().item())) {
            out.diverged = true;
            out.divergence = "non-finite loss at epoch " + std::to_string(epoch) + " on " + p.inst->id;
            break;
          }
          num::accumulate(grads, tape.backward(loss));
          sum_obj += t.objective;
          sum_kl += t.kl;
          ++n_seen;
        }
      } catch (const NumericError& err) {
        out.diverged = true;
        out.divergence = "epoch " + std::to_string(epoch) + ": " + err.what();
      }
      if (out.diverged) break;
      if (!all_finite(grads)) {
        out.diverged = true;
        out.divergence = "non-finite gradient at epoch " + std::to_string(epoch);
        break;
      }
      num::ParameterStore before = ps;
      num::adam_step(ps, grads, adam);
      if (!std::all_of(ps.begin(), ps.end(), [](const auto& kv) { return kv.second.all_finite(); })) {
        ps = std::move(before);
        out.diverged = true;
        out.divergence = "non-finite parameters at epoch " + std::to_string(epoch);
      }
    }
    if (!out.diverged) {
      try {
        rec_bleu = dev_bleu4(model, ps, vocab, dev);
        rec_dev_obj = dev_objective(model, ps, vocab, dev, opt);
        if (model.program_model() && cfg.probe_size > 0) rec_probe = probe(model, ps, pairs, cfg.probe_size);
      } catch (const NumericError& err) {
        out.diverged = true;
        out.divergence = "epoch " + std::to_string(epoch) + ": " + err.what();
      }
    }
    if (out.diverged) {
      // the best epoch so far, or the last finite parameters before any
      if (out.best_epoch == 0) out.params = ps;
      spdlog::error("run {}: {}; keeping the last good parameters", run, out.divergence);
      break;
    }

    EpochRecord rec;
    rec.run = run;
    rec.epoch = epoch;
    rec.lambda = model.config().space.lambda;
    rec.w_aux = w_aux;
    rec.objective = sum_obj / std::max(1, n_seen);
    if (has_q) rec.elbo = rec.objective;
    rec.kl = sum_kl / std::max(1, n_seen);
    rec.aux = n_aux ? sum_aux / n_aux : 0.0;
    rec.dev_bleu4 = rec_bleu;
    rec.dev_objective = rec_dev_obj;
    if (rec_probe) {
      rec.probe = rec_probe;
      if (!rec.probe->holds()) spdlog::warn("run {} epoch {}: variational identity check outside tolerance", run, epoch);
      out.probe.merge(*rec.probe);
    }
    if (rec.dev_bleu4 > out.best_bleu) {
      out.best_bleu = rec.dev_bleu4;
      out.best_epoch = epoch;
      out.params = ps;
      rec.best = true;
      stale = 0;
    } else {
      ++stale;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    spdlog::info("run {} epoch {:>3}  objective {:9.4f}  kl {:7.4f}  aux {:7.4f}  dev bleu4 {:.4f}{}  ({:.1f}s)", run,
                 epoch, rec.objective, rec.kl, rec.aux, rec.dev_bleu4, rec.best ? " *" : "", secs);
    out.log.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (stale >= cfg.patience) {
      spdlog::info("run {}: no dev Bleu-4 gain for {} epochs, stopping", run, cfg.patience);
      break;
    }
  }
  return out;
}

}  // namespace

TrainResult train(ModelConfig model_cfg, const TrainConfig& cfg, const data::Dataset& ds,
                  const EpochCallback& on_epoch) {
  if (cfg.epochs < 1 || cfg.batch_size < 1 || cfg.patience < 1 || !(cfg.learning_rate > 0.0))
    throw ArgumentError("train: epochs, batch size, patience and learning rate must be positive");
  const auto train_split = ds.split(data::Split::train);
  auto dev = ds.split(data::Split::dev);
  if (train_split.empty()) throw ArgumentError("train: dataset has no train split");
  if (dev.empty()) throw ArgumentError("train: dataset has no dev split");
  if (cfg.dev_limit > 0 && static_cast<int>(dev.size()) > cfg.dev_limit) dev.resize(cfg.dev_limit);

  if (cfg.direct_conditioning) {
    if (!is_program_model(model_cfg.kind)) throw ArgumentError("direct conditioning applies to the program model");
    model_cfg.kind = ModelKind::truce_d;
  }
  if (!is_program_model(model_cfg.kind) && cfg.no_inference_net)
    throw ArgumentError("the inference-network ablation applies to the program model");

  const data::Vocabulary vocab = data::build_vocab(ds.train_captions());
  model_cfg.vocab = vocab.size();
  const data::HeuristicLexicon lex;
  if (static_cast<int>(lex.patterns().size()) > model_cfg.space.n_pattern ||
      static_cast<int>(lex.locates().size()) > model_cfg.space.n_locate)
    throw ArgumentError("heuristic lexicon has more keywords than modules");
  const nmn::ProgramSpace space(model_cfg.space);

  std::vector<Pair> pairs;
  for (const data::Instance* inst : train_split)
    for (const std::string& c : inst->captions) {
      if (data::split_words(c).empty()) continue;
      pairs.push_back({inst, vocab.encode(c), heuristic_program(lex, space, c)});
    }
  if (pairs.empty()) throw ArgumentError("train: no usable training captions");

  TrainResult res;
  res.train_pairs = static_cast<int>(pairs.size());
  res.tagged_pairs = static_cast<int>(std::count_if(pairs.begin(), pairs.end(), [](const Pair& p) { return p.label; }));

  std::vector<double> lambdas = cfg.lambda_sweep;
  if (lambdas.empty()) lambdas.push_back(model_cfg.space.lambda);
  std::vector<double> weights = cfg.w_aux_sweep;
  if (weights.empty()) weights.push_back(cfg.w_aux);
  if (cfg.no_heuristic) weights = {0.0};
  if (res.tagged_pairs == 0 && std::any_of(weights.begin(), weights.end(), [](double w) { return w > 0.0; }))
    spdlog::warn("no training caption carries a heuristic label; the auxiliary loss contributes 0");
  spdlog::info("training {} on {} pairs ({} tagged), vocabulary {}", to_string(model_cfg.kind), res.train_pairs,
               res.tagged_pairs, vocab.size());

  RunOutcome best;
  ModelConfig best_cfg = model_cfg;
  double best_w = weights.front();
  int run = 0;
  for (double lambda : lambdas)
    for (double w : weights) {
      ModelConfig mc = model_cfg;
      mc.space.lambda = lambda;
      const Model model(mc);
      RunOutcome o = run_one(model, cfg, w, run, pairs, dev, vocab, on_epoch);
      res.log.insert(res.log.end(), o.log.begin(), o.log.end());
      res.probe.merge(o.probe);
      const bool better = run == 0 || (!o.diverged && (best.diverged || o.best_bleu > best.best_bleu));
      if (better) {
        res.best_run = run;
        best_cfg = mc;
        best_w = w;
        best = std::move(o);
      }
      ++run;
    }

  res.best_epoch = best.best_epoch;
  res.best_dev_bleu4 = std::max(0.0, best.best_bleu);
  res.diverged = best.diverged;
  res.divergence = best.divergence;
  res.checkpoint.params = std::move(best.params);
  res.checkpoint.manifest = {
      {"format", kCheckpointFormat},
      {"tool_version", kVersion},
      {"kind", to_string(best_cfg.kind)},
      {"model", to_json(best_cfg)},
      {"train", to_json(cfg)},
      {"vocab", vocab.tokens()},
      {"counts",
       {{"train_instances", train_split.size()},
        {"dev_instances", ds.split(data::Split::dev).size()},
        {"test_instances", ds.split(data::Split::test).size()},
        {"train_pairs", res.train_pairs},
        {"tagged_pairs", res.tagged_pairs}}},
      {"lambda", best_cfg.space.lambda},
      {"w_aux", best_w},
      {"anchored", best_w > 0.0 && res.tagged_pairs > 0},
      {"best_run", res.best_run},
      {"best_epoch", res.best_epoch},
      {"dev_bleu4", res.best_dev_bleu4},
      {"diverged", res.diverged},
  };
  return res;
}

TrainedModel TrainedModel::from_checkpoint(const Checkpoint& c) {
  try {
    const ModelConfig mc = model_config_from_json(c.manifest.at("model"));
    data::Vocabulary vocab(c.manifest.at("vocab").get<std::vector<std::string>>());
    if (vocab.size() != mc.vocab) throw SchemaError("checkpoint vocabulary size disagrees with the model config");
    TrainedModel tm{Model(mc), c.params, std::move(vocab), c.manifest};
    num::ParameterStore expected;
    Rng rng(0);
    tm.model.init_params(expected, rng);
    for (const auto& [name, t] : expected) {
      const auto it = tm.params.find(name);
      if (it == tm.params.end()) throw SchemaError("checkpoint lacks tensor " + name);
      if (it->second.shape() != t.shape())
        throw SchemaError("checkpoint tensor " + name + " has shape " + num::shape_str(it->second.shape()) +
                          ", expected " + num::shape_str(t.shape()));
    }
    return tm;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("checkpoint manifest: ") + e.what());
  } catch (const ArgumentError& e) {
    throw SchemaError(std::string("checkpoint manifest: ") + e.what());
  }
}

bool TrainedModel::anchored() const { return manifest.value("anchored", false); }

std::vector<std::string> TrainedModel::words(const std::vector<int>& ids) const { return caption_words(vocab, ids); }

}  // namespace truce::inline TRUCE_PRECISION::train
