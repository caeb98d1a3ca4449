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

// truce: data generation, training, captioning and evaluation from one binary.
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "truce/baselines/near_nbr.hpp"
#include "truce/data/dataset.hpp"
#include "truce/data/stock.hpp"
#include "truce/data/synth.hpp"
#include "truce/eval/evaluate.hpp"
#include "truce/eval/metrics.hpp"
#include "truce/train/trainer.hpp"
#include "truce/util/error.hpp"
#include "truce/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace truce;

namespace {

// Bad flag values or combinations: exit code 1.
struct UsageError : Error {
  using Error::Error;
};

// Resolved options of a subcommand, without output locations, so identical
// runs written to different paths embed the same text.
std::string resolved_config(const CLI::App* sub) {
  std::istringstream in(sub->config_to_str(true, false));
  std::string line, out;
  static const std::set<std::string> skip{"out", "metrics", "force", "plot"};
  while (std::getline(in, line)) {
    const std::string key = line.substr(0, line.find('='));
    if (skip.count(key)) continue;
    out += line + "\n";
  }
  return out;
}

json run_header(const CLI::App* sub) {
  return {{"type", "run"}, {"tool", "truce"}, {"version", kVersion}, {"command", sub->get_name()},
          {"config", resolved_config(sub)}};
}

void check_writable(const fs::path& p, bool force) {
  if (fs::exists(p) && !force) throw UsageError(p.string() + " exists; pass --force to overwrite");
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

void write_sidecar(const fs::path& out, const CLI::App* sub, json extra) {
  json j = run_header(sub);
  j.update(extra);
  std::ofstream f(out.string() + ".manifest.json");
  f << j.dump(2) << "\n";
}

std::vector<data::SynthClass> parse_classes(const std::string& s) {
  if (s == "all" || s == "6") return data::all_classes();
  if (s == "4" || s == "train4") return data::composition_train_classes();
  if (s == "heldout" || s == "2") return data::composition_heldout_classes();
  std::vector<data::SynthClass> out;
  std::stringstream ss(s);
  std::string tok;
  try {
    while (std::getline(ss, tok, ',')) out.push_back(data::parse_class(tok));
  } catch (const ArgumentError& e) {
    throw UsageError(e.what());
  }
  if (out.empty()) throw UsageError("--classes is empty");
  return out;
}

eval::Instances select(const data::Dataset& ds, const std::string& split) {
  if (split == "all") {
    eval::Instances v;
    for (const auto& i : ds.instances) v.push_back(&i);
    return v;
  }
  try {
    return ds.split(data::parse_split(split));
  } catch (const ArgumentError& e) {
    throw UsageError(e.what());
  }
}

// Share of reference words the checkpoint vocabulary does not know.
void check_vocab(const train::TrainedModel& tm, const eval::Instances& inst, double max_oov) {
  long total = 0, oov = 0;
  for (const auto* i : inst)
    for (const auto& c : i->captions)
      for (const auto& w : data::split_words(c)) {
        ++total;
        oov += tm.vocab.id(w) == data::kUnk;
      }
  if (total > 0 && static_cast<double>(oov) / total > max_oov)
    throw Error("checkpoint vocabulary does not match the data: " + std::to_string(oov) + " of " +
                std::to_string(total) + " reference words are unknown");
}

std::string joined(const train::TrainedModel& tm, const std::vector<int>& ids) {
  std::string s;
  for (const auto& w : tm.words(ids)) s += (s.empty() ? "" : " ") + w;
  return s;
}

void print_histogram(const data::Dataset& ds) {
  std::map<std::string, int> h;
  for (const auto& i : ds.instances) ++h[i.meta ? data::class_name({i.meta->trend, i.meta->location}) : "none"];
  for (const auto& [k, n] : h) std::printf("%-18s %d\n", k.c_str(), n);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Truth-conditional captioning of time series"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML config file; one section per subcommand, flags override it");
  app.allow_config_extras(CLI::config_extras_mode::error);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")->capture_default_str();

  // synth-gen
  auto* gen = app.add_subcommand("synth-gen", "Generate a synthetic captioned corpus");
  fs::path gen_out;
  int gen_n = 720, gen_t = 12, gen_caps = 3;
  std::string gen_classes = "all";
  std::uint64_t gen_seed = 1;
  bool gen_force = false;
  gen->add_option("--out", gen_out, "Dataset file (JSONL)")->required();
  gen->add_option("--n", gen_n, "Number of series")->capture_default_str()->check(CLI::PositiveNumber);
  gen->add_option("--t", gen_t, "Series length")->capture_default_str()->check(CLI::Range(6, 100000));
  gen->add_option("--classes", gen_classes, "all, 4 (composition training), heldout, or a list like increase-begin,...")
      ->capture_default_str();
  gen->add_option("--captions", gen_caps, "Captions per series")->capture_default_str()->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed, "Random seed")->capture_default_str();
  gen->add_flag("--force", gen_force, "Overwrite an existing file");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Sample normalized windows from price CSV files");
  fs::path ing_dir, ing_out;
  int ing_count = 1900, ing_t = 12;
  std::uint64_t ing_seed = 1;
  bool ing_force = false;
  ingest->add_option("--csv-dir", ing_dir, "Directory of <company>_<daily|weekly>.csv files")->required()
      ->check(CLI::ExistingDirectory);
  ingest->add_option("--out", ing_out, "Dataset file (JSONL)")->required();
  ingest->add_option("--count", ing_count, "Windows to sample")->capture_default_str()->check(CLI::PositiveNumber);
  ingest->add_option("--t", ing_t, "Window length")->capture_default_str()->check(CLI::PositiveNumber);
  ingest->add_option("--seed", ing_seed, "Random seed")->capture_default_str();
  ingest->add_flag("--force", ing_force, "Overwrite an existing file");

  // convert
  auto* convert = app.add_subcommand("convert", "Convert a released captioned corpus to the canonical format");
  fs::path conv_in, conv_out;
  std::uint64_t conv_seed = 1;
  bool conv_force = false;
  convert->add_option("--released", conv_in, "Released corpus file or directory")->required()->check(CLI::ExistingPath);
  convert->add_option("--out", conv_out, "Dataset file (JSONL)")->required();
  convert->add_option("--seed", conv_seed, "Seed for splits the release does not define")->capture_default_str();
  convert->add_flag("--force", conv_force, "Overwrite an existing file");

  // train
  auto* trn = app.add_subcommand("train", "Train a captioning model");
  fs::path tr_data, tr_out, tr_metrics;
  std::string tr_model = "truce";
  std::vector<std::string> tr_ablate;
  train::TrainConfig tc;
  train::ModelConfig mc;
  bool tr_force = false;
  trn->add_option("--data", tr_data, "Dataset file")->required()->check(CLI::ExistingFile);
  trn->add_option("--out", tr_out, "Checkpoint file")->required();
  trn->add_option("--metrics", tr_metrics, "Per-epoch log (default: <out>.metrics.jsonl)");
  trn->add_option("--model", tr_model, "truce, truce-d, fc, lstm, conv or fft")
      ->capture_default_str()
      ->check(CLI::IsMember({"truce", "truce-d", "fc", "lstm", "conv", "fft"}));
  trn->add_option("--ablate", tr_ablate, "noinf and/or noheur")->check(CLI::IsMember({"noinf", "noheur"}));
  trn->add_option("--epochs", tc.epochs)->capture_default_str()->check(CLI::PositiveNumber);
  trn->add_option("--batch-size", tc.batch_size)->capture_default_str()->check(CLI::PositiveNumber);
  trn->add_option("--lr", tc.learning_rate, "Adam learning rate")->capture_default_str()->check(CLI::PositiveNumber);
  trn->add_option("--w-aux", tc.w_aux, "Heuristic-label (or classification) loss weight")->capture_default_str();
  trn->add_option("--w-aux-sweep", tc.w_aux_sweep, "Weights to try; best dev Bleu-4 is kept");
  trn->add_option("--lambda", mc.space.lambda, "Prior temperature on truth scores")->capture_default_str();
  trn->add_option("--lambda-sweep", tc.lambda_sweep, "Lambdas to try; best dev Bleu-4 is kept");
  trn->add_option("--patience", tc.patience)->capture_default_str()->check(CLI::PositiveNumber);
  trn->add_option("--probe-size", tc.probe_size, "Pairs checked for the variational identities")->capture_default_str();
  trn->add_option("--dev-limit", tc.dev_limit, "Dev instances used for model selection (0 = all)")->capture_default_str();
  trn->add_option("--seed", tc.seed)->capture_default_str();
  trn->add_option("--embed", mc.embed, "Decoder embedding width")->capture_default_str();
  trn->add_option("--hidden", mc.hidden, "Decoder LSTM width")->capture_default_str();
  trn->add_option("--inf-hidden", mc.inf_hidden, "Inference LSTM width")->capture_default_str();
  trn->add_option("--fc-hidden", mc.encoder.fc_hidden)->capture_default_str();
  trn->add_option("--lstm-hidden", mc.encoder.lstm_hidden)->capture_default_str();
  trn->add_option("--conv-channels", mc.encoder.conv_channels)->capture_default_str();
  trn->add_option("--fft-hidden", mc.encoder.fft_hidden)->capture_default_str();
  trn->add_flag("--force", tr_force, "Overwrite an existing checkpoint");

  // caption
  auto* cap = app.add_subcommand("caption", "Caption series with a trained model");
  fs::path cap_ckpt, cap_data, cap_out;
  std::string cap_mode = "greedy", cap_split = "test";
  double cap_top_p = 0.9, cap_max_oov = 0.1;
  int cap_l = 12;
  std::uint64_t cap_seed = 1;
  bool cap_force = false;
  cap->add_option("--ckpt", cap_ckpt, "Checkpoint file")->required()->check(CLI::ExistingFile);
  cap->add_option("--data", cap_data, "Dataset file")->required()->check(CLI::ExistingFile);
  cap->add_option("--split", cap_split, "train, dev, test or all")->capture_default_str();
  cap->add_option("--mode", cap_mode)->capture_default_str()->check(CLI::IsMember({"greedy", "sample"}));
  cap->add_option("--top-p", cap_top_p)->capture_default_str()->check(CLI::Range(1e-9, 1.0));
  cap->add_option("--l", cap_l, "Samples per series")->capture_default_str()->check(CLI::PositiveNumber);
  cap->add_option("--seed", cap_seed)->capture_default_str();
  cap->add_option("--max-oov", cap_max_oov, "Largest unknown-word share of the references")->capture_default_str();
  cap->add_option("--out", cap_out, "Captions file (JSONL); stdout if absent");
  cap->add_flag("--force", cap_force, "Overwrite an existing file");

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate a trained model");
  std::vector<fs::path> ev_ckpts;
  fs::path ev_data, ev_out, ev_plot, ev_base_data, ev_stopwords;
  std::string ev_suite = "metrics", ev_split = "test";
  std::vector<double> ev_top_p = eval::kDefaultTopP;
  int ev_l = 12;
  unsigned ev_threads = 1;
  double ev_max_oov = 0.1;
  std::uint64_t ev_seed = 1;
  bool ev_force = false;
  ev->add_option("--ckpt", ev_ckpts, "Checkpoint file(s); coverage plots every one")->required()
      ->check(CLI::ExistingFile);
  ev->add_option("--data", ev_data, "Dataset file")->required()->check(CLI::ExistingFile);
  ev->add_option("--suite", ev_suite)
      ->capture_default_str()
      ->check(CLI::IsMember({"metrics", "correctness", "coverage", "transfer", "composition", "analyze"}));
  ev->add_option("--split", ev_split, "train, dev, test or all")->capture_default_str();
  ev->add_option("--base-data", ev_base_data, "transfer: train-length dataset for the drop")->check(CLI::ExistingFile);
  ev->add_option("--top-p", ev_top_p, "coverage: nucleus thresholds")->capture_default_str();
  ev->add_option("--l", ev_l, "coverage: samples per series")->capture_default_str()->check(CLI::PositiveNumber);
  ev->add_option("--seed", ev_seed)->capture_default_str();
  ev->add_option("--threads", ev_threads, "Evaluation workers (0 = all cores)")->capture_default_str();
  ev->add_option("--stopwords", ev_stopwords, "analyze: stop-word file (default: built-in list)")
      ->check(CLI::ExistingFile);
  ev->add_option("--max-oov", ev_max_oov, "Largest unknown-word share of the references")->capture_default_str();
  ev->add_option("--out", ev_out, "Report file (JSONL); stdout if absent");
  ev->add_option("--plot", ev_plot, "coverage: SVG plot file");
  ev->add_flag("--force", ev_force, "Overwrite existing files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*gen) {
      check_writable(gen_out, gen_force);
      const data::Dataset ds = data::gen_synth_dataset(gen_n, gen_t, parse_classes(gen_classes), gen_seed, gen_caps);
      data::save_dataset(ds, gen_out);
      write_sidecar(gen_out, gen, {{"instances", ds.instances.size()}});
      print_histogram(ds);
    } else if (*ingest) {
      check_writable(ing_out, ing_force);
      Rng rng(Rng::derive(ing_seed, "ingest"));
      const auto sample = data::sample_stock_windows(data::load_price_dir(ing_dir), ing_t, ing_count, rng);
      if (sample.degenerate > 0) spdlog::info("{} constant windows resampled", sample.degenerate);
      if (sample.shortfall > 0) spdlog::warn("{} windows could not be placed", sample.shortfall);
      const data::Dataset ds = data::stock_dataset(sample, ing_seed);
      data::save_dataset(ds, ing_out);
      write_sidecar(ing_out, ingest,
                    {{"instances", ds.instances.size()}, {"degenerate", sample.degenerate}, {"shortfall", sample.shortfall}});
      std::printf("%zu windows (%d degenerate resampled, %d short)\n", ds.instances.size(), sample.degenerate,
                  sample.shortfall);
    } else if (*convert) {
      check_writable(conv_out, conv_force);
      const data::Dataset ds = data::convert_released(conv_in, conv_seed);
      data::save_dataset(ds, conv_out);
      std::size_t caps = 0;
      for (const auto& i : ds.instances) caps += i.captions.size();
      write_sidecar(conv_out, convert, {{"instances", ds.instances.size()}, {"captions", caps}});
      std::printf("%zu instances, %zu captions\n", ds.instances.size(), caps);
    } else if (*trn) {
      check_writable(tr_out, tr_force);
      if (tr_metrics.empty()) tr_metrics = tr_out.string() + ".metrics.jsonl";
      check_writable(tr_metrics, tr_force);
      mc.kind = train::parse_model_kind(tr_model);
      for (const auto& a : tr_ablate) {
        if (!train::is_program_model(mc.kind)) throw UsageError("--ablate applies to truce and truce-d");
        (a == "noinf" ? tc.no_inference_net : tc.no_heuristic) = true;
      }
      const data::Dataset ds = data::load_dataset(tr_data);
      std::ofstream log(tr_metrics);
      log << run_header(trn).dump() << "\n";
      const auto res = train::train(mc, tc, ds, [&](const train::EpochRecord& r) { log << to_json(r).dump() << "\n"; });
      auto ckpt = res.checkpoint;
      ckpt.manifest["run_config"] = resolved_config(trn);
      train::save_checkpoint(ckpt, tr_out);
      std::printf("checkpoint %s: best dev Bleu-4 %.4f at epoch %d\n", tr_out.c_str(), res.best_dev_bleu4,
                  res.best_epoch);
      if (res.diverged) {
        spdlog::error("training diverged ({}); wrote the last good parameters", res.divergence);
        return 2;
      }
    } else if (*cap) {
      const auto tm = train::TrainedModel::load(cap_ckpt);
      const data::Dataset ds = data::load_dataset(cap_data);
      const auto inst = select(ds, cap_split);
      check_vocab(tm, inst, cap_max_oov);
      std::ofstream file;
      if (!cap_out.empty()) {
        check_writable(cap_out, cap_force);
        file.open(cap_out);
      }
      std::ostream& out = cap_out.empty() ? std::cout : file;
      out << run_header(cap).dump() << "\n";
      for (const auto* i : inst) {
        json rec{{"id", i->id}};
        std::vector<train::Caption> caps;
        if (cap_mode == "greedy") {
          caps.push_back(tm.model.greedy(tm.params, i->series));
        } else {
          Rng rng(Rng::derive(cap_seed, i->id));
          for (int l = 0; l < cap_l; ++l) caps.push_back(tm.model.sample(tm.params, i->series, cap_top_p, rng));
        }
        json list = json::array();
        for (const auto& c : caps) {
          json e{{"caption", joined(tm, c.ids)}};
          if (c.program >= 0) {
            const auto& sp = tm.model.space();
            e["program"] = c.program;
            e["pattern"] = sp.pattern_of(c.program);
            e["locate"] = sp.locate_of(c.program);
            e["score"] = c.score;
          }
          list.push_back(std::move(e));
        }
        rec["captions"] = std::move(list);
        out << rec.dump() << "\n";
      }
    } else if (*ev) {
      const data::Dataset ds = data::load_dataset(ev_data);
      const auto inst = select(ds, ev_split);
      if (inst.empty()) throw Error("no instances in split '" + ev_split + "'");
      std::vector<train::TrainedModel> models;
      for (const auto& p : ev_ckpts) {
        models.push_back(train::TrainedModel::load(p));
        check_vocab(models.back(), inst, ev_max_oov);
      }
      if (ev_suite != "coverage" && models.size() > 1) throw UsageError("only --suite coverage takes several --ckpt");
      if ((ev_suite == "correctness" || ev_suite == "transfer" || ev_suite == "composition") && !ds.has_meta())
        throw UsageError("--suite " + ev_suite + " needs pattern metadata (SYNTH data)");
      std::ofstream file;
      if (!ev_out.empty()) {
        check_writable(ev_out, ev_force);
        file.open(ev_out);
      }
      std::ostream& out = ev_out.empty() ? std::cout : file;
      json header = run_header(ev);
      header["checkpoints"] = json::array();
      for (const auto& m : models) header["checkpoints"].push_back(m.manifest.value("kind", "?"));
      out << header.dump() << "\n";
      const auto& tm = models.front();
      if (ev_suite == "metrics") {
        const auto rep = eval::evaluate_metrics(tm, inst, ev_threads);
        json summary = eval::to_json(rep);
        const json records = summary["records"];
        summary.erase("records");
        summary["suite"] = "metrics";
        summary["cider_scale"] = metrics::kCiderScale;
        if (!rep.correctness) summary["correctness"] = "not machine-checkable";
        out << summary.dump() << "\n";
        for (const auto& r : records) out << r.dump() << "\n";
      } else if (ev_suite == "correctness") {
        out << json{{"suite", "correctness"}, {"instances", inst.size()},
                    {"correctness", eval::correctness(tm, inst, ev_threads)}}.dump()
            << "\n";
      } else if (ev_suite == "transfer") {
        json j{{"suite", "transfer"},
               {"instances", inst.size()},
               {"series_length", inst.front()->series.size()},
               {"correctness", eval::correctness(tm, inst, ev_threads)}};
        if (!ev_base_data.empty()) {
          const data::Dataset base_ds = data::load_dataset(ev_base_data);
          const double base = eval::correctness(tm, select(base_ds, ev_split), ev_threads);
          j["base_correctness"] = base;
          j["drop"] = base - j["correctness"].get<double>();
        }
        out << j.dump() << "\n";
      } else if (ev_suite == "composition") {
        json j = eval::to_json(eval::composition_eval(tm, inst));
        j["suite"] = "composition";
        out << j.dump() << "\n";
      } else if (ev_suite == "analyze") {
        const auto sw = ev_stopwords.empty() ? metrics::default_stopwords() : metrics::load_stopwords(ev_stopwords);
        for (auto [name, src] : {std::pair{"prior", eval::WordSource::prior}, {"inference", eval::WordSource::inference}}) {
          json j = eval::to_json(eval::module_word_table(tm, inst, src, sw));
          j["suite"] = "analyze";
          j["source"] = name;
          out << j.dump() << "\n";
        }
      } else if (ev_suite == "coverage") {
        std::vector<std::pair<std::string, std::vector<eval::CoveragePoint>>> systems;
        for (std::size_t k = 0; k < models.size(); ++k) {
          const auto pts = eval::coverage_curve(models[k], inst, ev_l, ev_top_p, ev_seed, ev_threads);
          const std::string name = models[k].manifest.value("kind", "model") + "#" + std::to_string(k);
          for (const auto& p : pts) {
            json j{{"suite", "coverage"}, {"system", name},      {"top_p", p.top_p},
                   {"coverage", p.coverage}, {"samples", p.samples}, {"correctness", nullptr}};
            if (p.correctness) j["correctness"] = *p.correctness;
            out << j.dump() << "\n";
          }
          systems.emplace_back(name, pts);
        }
        if (!ev_plot.empty()) {
          check_writable(ev_plot, ev_force);
          eval::write_coverage_svg(ev_plot, systems, run_header(ev).dump(2));
        }
      }
    }
  } catch (const UsageError& e) {
    spdlog::error("{}", e.what());
    return 1;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 2;
  }
  return 0;
}
