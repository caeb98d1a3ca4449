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

#include "truce/train/model.hpp"

#include <algorithm>
#include <cmath>

#include "truce/data/vocab.hpp"
#include "truce/train/objective.hpp"
#include "truce/util/error.hpp"

namespace truce::inline TRUCE_PRECISION::train {

using nlohmann::json;
using num::real;
using num::Tensor;

std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::truce: return "truce";
    case ModelKind::truce_d: return "truce-d";
    case ModelKind::fc: return "fc";
    case ModelKind::lstm: return "lstm";
    case ModelKind::conv: return "conv";
    case ModelKind::fft: return "fft";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view s) {
  if (s == "truce") return ModelKind::truce;
  if (s == "truce-d") return ModelKind::truce_d;
  if (s == "fc") return ModelKind::fc;
  if (s == "lstm") return ModelKind::lstm;
  if (s == "conv") return ModelKind::conv;
  if (s == "fft") return ModelKind::fft;
  throw ArgumentError("unknown model '" + std::string(s) + "'");
}

bool is_program_model(ModelKind k) { return k == ModelKind::truce || k == ModelKind::truce_d; }

json to_json(const ModelConfig& c) {
  const auto& s = c.space;
  const auto& e = c.encoder;
  return {
      {"kind", to_string(c.kind)},
      {"vocab", c.vocab},
      {"space",
       {{"n_pattern", s.n_pattern},
        {"n_locate", s.n_locate},
        {"components", s.components},
        {"width", s.width},
        {"channels", s.channels},
        {"kernel", s.kernel},
        {"embed_dim", s.embed_dim},
        {"lambda", s.lambda},
        {"input_scale", s.input_scale}}},
      {"embed", c.embed},
      {"hidden", c.hidden},
      {"max_len", c.max_len},
      {"inf_embed", c.inf_embed},
      {"inf_hidden", c.inf_hidden},
      {"encoder",
       {{"kind", base::to_string(e.kind)},
        {"series_length", e.series_length},
        {"out", e.out},
        {"fc_hidden", e.fc_hidden},
        {"lstm_hidden", e.lstm_hidden},
        {"conv_channels", e.conv_channels},
        {"conv_kernel", e.conv_kernel},
        {"fft_hidden", e.fft_hidden},
        {"input_scale", e.input_scale}}},
  };
}

ModelConfig model_config_from_json(const json& j) {
  try {
    ModelConfig c;
    c.kind = parse_model_kind(j.at("kind").get<std::string>());
    c.vocab = j.at("vocab").get<int>();
    const json& s = j.at("space");
    c.space.n_pattern = s.at("n_pattern").get<int>();
    c.space.n_locate = s.at("n_locate").get<int>();
    c.space.components = s.at("components").get<int>();
    c.space.width = s.at("width").get<double>();
    c.space.channels = s.at("channels").get<int>();
    c.space.kernel = s.at("kernel").get<int>();
    c.space.embed_dim = s.at("embed_dim").get<int>();
    c.space.lambda = s.at("lambda").get<double>();
    c.space.input_scale = s.at("input_scale").get<double>();
    c.embed = j.at("embed").get<int>();
    c.hidden = j.at("hidden").get<int>();
    c.max_len = j.at("max_len").get<int>();
    c.inf_embed = j.at("inf_embed").get<int>();
    c.inf_hidden = j.at("inf_hidden").get<int>();
    const json& e = j.at("encoder");
    c.encoder.kind = base::parse_encoder_kind(e.at("kind").get<std::string>());
    c.encoder.series_length = e.at("series_length").get<int>();
    c.encoder.out = e.at("out").get<int>();
    c.encoder.fc_hidden = e.at("fc_hidden").get<int>();
    c.encoder.lstm_hidden = e.at("lstm_hidden").get<int>();
    c.encoder.conv_channels = e.at("conv_channels").get<int>();
    c.encoder.conv_kernel = e.at("conv_kernel").get<int>();
    c.encoder.fft_hidden = e.at("fft_hidden").get<int>();
    c.encoder.input_scale = e.at("input_scale").get<double>();
    return c;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("model config: ") + e.what());
  } catch (const ArgumentError& e) {
    throw SchemaError(std::string("model config: ") + e.what());
  }
}

namespace {

ModelConfig normalized(ModelConfig c) {
  switch (c.kind) {
    case ModelKind::truce_d: c.encoder.kind = base::EncoderKind::conv; break;
    case ModelKind::fc: c.encoder.kind = base::EncoderKind::fc; break;
    case ModelKind::lstm: c.encoder.kind = base::EncoderKind::lstm; break;
    case ModelKind::conv: c.encoder.kind = base::EncoderKind::conv; break;
    case ModelKind::fft: c.encoder.kind = base::EncoderKind::fft; break;
    case ModelKind::truce: break;
  }
  return c;
}

int cond_width(const ModelConfig& c) {
  const int program = 2 * c.space.embed_dim;
  switch (c.kind) {
    case ModelKind::truce: return program;
    case ModelKind::truce_d: return program + c.encoder.out;
    default: return c.encoder.out;
  }
}

std::vector<double> to_doubles(const Tensor& t) { return {t.storage().begin(), t.storage().end()}; }

}  // namespace

Model::Model(ModelConfig cfg)
    : cfg_(normalized(cfg)),
      space_(cfg_.space),
      decoder_(seq::DecoderConfig{cfg_.vocab, cfg_.embed, cfg_.hidden, cond_width(cfg_), cfg_.max_len}),
      inference_(seq::InferenceConfig{cfg_.vocab, cfg_.inf_embed, cfg_.inf_hidden, space_.size()}),
      encoder_(cfg_.encoder, "enc") {}

void Model::init_params(ParameterStore& ps, Rng& rng) const {
  if (program_model()) {
    space_.init_params(ps, rng);
    inference_.init_params(ps, rng);
    if (cfg_.kind == ModelKind::truce_d) encoder_.init_params(ps, rng);
  } else {
    encoder_.init_params(ps, rng);
    Tensor w({cfg_.encoder.out, space_.size()});
    for (real& v : w.storage()) v = static_cast<real>(rng.uniform(-0.1, 0.1));
    ps["cls.w"] = std::move(w);
    ps["cls.b"] = Tensor({1, space_.size()});
  }
  decoder_.init_params(ps, rng);
}

std::vector<double> Model::prepare(std::span<const double> series) const {
  if (!program_model() && encoder_.fixed_width()) return base::adapt_length(series, cfg_.encoder.series_length);
  return {series.begin(), series.end()};
}

Var Model::scores(Tape& tape, const ParameterStore& ps, std::span<const double> series) const {
  if (!program_model()) throw ArgumentError(std::string(to_string(cfg_.kind)) + " has no program scores");
  return space_.scores(tape, ps, space_.input(tape, series));
}

Var Model::conditioning(Tape& tape, const ParameterStore& ps, std::span<const double> series) const {
  if (!program_model()) return encoder_.encode(tape, ps, prepare(series));
  Var e = space_.embeddings(tape, ps);
  if (cfg_.kind == ModelKind::truce) return e;
  Var enc = encoder_.encode(tape, ps, series);
  Var ones = tape.constant(Tensor({space_.size(), 1}, 1));
  return num::concat_cols({e, num::matmul(ones, enc)});
}

PairTerms Model::pair_terms(Tape& tape, const ParameterStore& ps, std::span<const double> series,
                            const std::vector<int>& ids, std::optional<int> label, const ObjectiveOptions& opt) const {
  PairTerms out;
  if (!program_model()) {
    Var enc = encoder_.encode(tape, ps, prepare(series));
    Var lp = decoder_.caption_logprob(tape, ps, enc, ids);
    out.loss = num::scale(lp, -1);
    out.objective = out.recon = lp.value().item();
    if (label && opt.w_aux > 0.0) {
      Var logits = num::add(num::matmul(enc, tape.parameter(ps, "cls.w")), tape.parameter(ps, "cls.b"));
      out.aux_loss = aux_loss(num::log_softmax_rows(logits), *label);
      out.aux = out.aux_loss.value().item();
    }
    return out;
  }
  Var log_prior = space_.log_prior(scores(tape, ps, series));
  Var lp = num::transpose(decoder_.caption_logprob(tape, ps, conditioning(tape, ps, series), ids));
  out.log_prior = to_doubles(log_prior.value());
  out.caption_lp = to_doubles(lp.value());
  if (!opt.use_inference_net) {
    Var m = marginal_loglik(log_prior, lp);
    out.loss = num::scale(m, -1);
    out.objective = m.value().item();
    return out;
  }
  Var log_q = inference_.log_posterior(tape, ps, {ids});
  out.log_q = to_doubles(log_q.value());
  ElboTerms t = elbo(log_prior, lp, log_q);
  out.objective = t.elbo.value().item();
  out.recon = t.recon.value().item();
  out.kl = t.kl.value().item();
  out.loss = num::scale(t.elbo, -1);
  if (label && opt.w_aux > 0.0) {
    out.aux_loss = aux_loss(log_q, *label);
    out.aux = out.aux_loss.value().item();
  }
  return out;
}

std::vector<double> Model::prior(const ParameterStore& ps, std::span<const double> series) const {
  return nmn::prior(space_, ps, series);
}

Caption Model::greedy(const ParameterStore& ps, std::span<const double> series) const {
  Tape tape(false);
  Caption c;
  Var cond = conditioning(tape, ps, series);
  if (program_model()) {
    const Tensor& s = scores(tape, ps, series).value();
    const auto& v = s.storage();
    c.program = static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
    c.score = v[c.program];
    cond = num::slice_rows(cond, c.program, c.program + 1);
  }
  c.ids = decoder_.decode(ps, cond.value(), {}, nullptr);
  return c;
}

Caption Model::sample(const ParameterStore& ps, std::span<const double> series, double top_p, Rng& rng) const {
  Tape tape(false);
  Caption c;
  Var cond = conditioning(tape, ps, series);
  if (!program_model()) {
    c.ids = decoder_.decode(ps, cond.value(), {seq::SampleMode::nucleus, top_p, 1.0}, &rng);
    return c;
  }
  const auto p = prior(ps, series);
  c.program = seq::pick_token(p, {seq::SampleMode::nucleus, top_p, 1.0}, &rng);
  c.score = scores(tape, ps, series).value()[c.program];
  c.ids = decoder_.decode(ps, num::slice_rows(cond, c.program, c.program + 1).value(), {}, nullptr);
  return c;
}

double Model::loglik(const ParameterStore& ps, std::span<const double> series, const std::vector<int>& ids) const {
  Tape tape(false);
  Var lp = decoder_.caption_logprob(tape, ps, conditioning(tape, ps, series), ids);
  if (!program_model()) return lp.value().item();
  Var log_prior = space_.log_prior(scores(tape, ps, series));
  const auto c = check_identities(to_doubles(log_prior.value()), to_doubles(num::transpose(lp).value()),
                                  to_doubles(log_prior.value()));
  return c.marginal;
}

int Model::infer_program(const ParameterStore& ps, const std::vector<int>& ids) const {
  const auto q = inference_.posterior(ps, ids);
  return static_cast<int>(std::max_element(q.begin(), q.end()) - q.begin());
}

std::size_t Model::prediction_parameters(const ParameterStore& ps) const {
  std::size_t n = 0;
  for (const auto& [name, t] : ps)
    if (name.rfind("inf.", 0) != 0 && name.rfind("cls.", 0) != 0) n += t.size();
  return n;
}

}  // namespace truce::inline TRUCE_PRECISION::train
