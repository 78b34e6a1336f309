// Copyright 2026 The specmer Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "specmer/cli.hpp"

#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>
#include <set>

#include "CLI11.hpp"
#include "json.hpp"
#include "specmer/binary_io.hpp"
#include "specmer/cv_harness.hpp"
#include "specmer/dataset.hpp"
#include "specmer/errors.hpp"
#include "specmer/json_io.hpp"
#include "specmer/metrics.hpp"
#include "specmer/report.hpp"
#include "specmer/rng.hpp"
#include "specmer/run_config.hpp"

namespace specmer {
namespace {

namespace fs = std::filesystem;
using OJson = nlohmann::ordered_json;

constexpr const char* kIndexName = "index.jsonl";

struct LoadedData {
  std::vector<Example> examples;
  std::vector<std::string> tags;
  int K = 0;
};

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string safe_file_stem(const std::string& id) {
  std::string s;
  for (char c : id) {
    s += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.') ? c : '_';
  }
  return s;
}

// Preprocessed spectrogram index: header {"tags", "K", "nfft", "window"},
// then {"id", "file", "labels", "hash"} per item.
struct IndexEntry {
  std::string id;
  std::string file;
  std::vector<std::uint8_t> labels;
  std::string hash;
};

struct SpectrogramIndex {
  std::vector<std::string> tags;
  StftConfig stft;
  std::vector<IndexEntry> entries;
};

SpectrogramIndex read_index(const fs::path& dir) {
  const auto bytes = read_file_bytes(dir / kIndexName);
  std::istringstream in(std::string(bytes.begin(), bytes.end()));
  std::string line;
  SpectrogramIndex idx;
  bool header = false;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      if (!header) {
        idx.tags = j.at("tags").get<std::vector<std::string>>();
        idx.stft.nfft = j.at("nfft").get<int>();
        idx.stft.window = window_from_string(j.at("window").get<std::string>());
        header = true;
      } else {
        idx.entries.push_back({j.at("id").get<std::string>(), j.at("file").get<std::string>(),
                               j.at("labels").get<std::vector<std::uint8_t>>(),
                               j.at("hash").get<std::string>()});
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError((dir / kIndexName).string() + " line " + std::to_string(n) + ": " + e.what());
    }
  }
  if (!header) throw ParseError((dir / kIndexName).string() + ": missing header");
  return idx;
}

std::string index_to_jsonl(const SpectrogramIndex& idx) {
  OJson h;
  h["tags"] = idx.tags;
  h["K"] = idx.stft.K();
  h["nfft"] = idx.stft.nfft;
  h["window"] = to_string(idx.stft.window);
  std::string out = h.dump() + "\n";
  for (const auto& e : idx.entries) {
    OJson j;
    j["id"] = e.id;
    j["file"] = e.file;
    j["labels"] = e.labels;
    j["hash"] = e.hash;
    out += j.dump() + "\n";
  }
  return out;
}

LoadedData load_data(const RunConfig& rc) {
  LoadedData d;
  if (rc.spectrograms) {
    const SpectrogramIndex idx = read_index(*rc.spectrograms);
    d.tags = idx.tags;
    d.K = idx.stft.K();
    for (const auto& e : idx.entries) {
      const Spectrogram spec = read_spg(*rc.spectrograms / e.file);
      if (spec.K() != d.K) throw FormatError(e.file + ": K differs from the index header");
      d.examples.push_back({e.id, spectrogram_input(spec), {e.labels.begin(), e.labels.end()}});
    }
  } else if (rc.manifest) {
    const Manifest m = load_manifest(*rc.manifest);
    d.tags = m.tags;
    d.K = rc.stft.K();
    d.examples = make_examples(load_corpus(m, rc.labels), rc.stft);
  } else {
    throw ConfigError("no input data: set 'spectrograms' or 'manifest'");
  }
  return d;
}

ModelConfig model_for_data(const RunConfig& rc, const LoadedData& d) {
  ModelConfig mc = rc.model;
  if (rc.model_input_K_set && mc.input_K != d.K) {
    throw ConfigError("model.input_K = " + std::to_string(mc.input_K) +
                      " but the data has K = " + std::to_string(d.K));
  }
  mc.input_K = d.K;
  mc.num_tags = static_cast<int>(d.tags.size());
  mc.validate();
  return mc;
}

fs::path require_out(const RunConfig& rc) {
  if (!rc.output_dir) throw ConfigError("no output directory: pass --out or set 'output_dir'");
  fs::create_directories(*rc.output_dir);
  return *rc.output_dir;
}

// Options shared by the config-driven subcommands; a flag given on the
// command line overrides the file.
struct CommonFlags {
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  std::string manifest;
  std::string spectrograms;
  int epochs = 0;
  int threads = 0;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* epochs_opt = nullptr;
  CLI::Option* threads_opt = nullptr;

  void add_to(CLI::App* app) {
    app->add_option("--config", config, "JSON run config");
    seed_opt = app->add_option("--seed", seed, "Run seed (overrides config)");
    app->add_option("--out", out, "Output directory (overrides config)");
    app->add_option("--manifest", manifest, "JSON-lines manifest (overrides config)");
    app->add_option("--spectrograms", spectrograms,
                    "Preprocessed spectrogram directory (overrides config)");
    epochs_opt = app->add_option("--epochs", epochs, "Training epochs (overrides config)");
    threads_opt = app->add_option("--threads", threads,
                                  "Concurrent folds; 0 = SPECMER_THREADS or all cores");
  }

  RunConfig resolve() const {
    RunConfig rc = config.empty() ? RunConfig{} : load_run_config(config);
    if (config.empty()) rc.model.input_K = rc.stft.K();
    if (seed_opt->count()) rc.seed = seed;
    if (!out.empty()) rc.output_dir = out;
    if (!manifest.empty()) rc.manifest = manifest;
    if (!spectrograms.empty()) rc.spectrograms = spectrograms;
    if (epochs_opt->count()) rc.train.epochs = epochs;
    if (threads_opt->count()) rc.cv.threads = threads;
    rc.train.validate();
    rc.finalize();
    return rc;
  }
};

void write_text(const fs::path& path, const std::string& text) { write_file_atomic(path, text); }

int cmd_synth(int items, int tags, std::uint64_t seed, const std::string& out_dir,
              const SynthOptions& opts, std::ostream& out) {
  const Manifest m = synth_corpus(items, tags, seed, out_dir, opts);
  out << "wrote " << m.entries.size() << " items with " << m.tags.size() << " tags to "
      << (fs::path(out_dir) / "manifest.jsonl").string() << "\n";
  return 0;
}

// Writes into 'spectrograms' when set, so that later subcommands reading the
// same config find the index; otherwise into the output directory.
int cmd_preprocess(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  if (!rc.manifest) throw ConfigError("preprocess needs a manifest");
  fs::path dir;
  if (rc.spectrograms) {
    dir = *rc.spectrograms;
    fs::create_directories(dir);
  } else {
    dir = require_out(rc);
  }
  const Manifest m = load_manifest(*rc.manifest);

  std::map<std::string, IndexEntry> previous;
  if (fs::exists(dir / kIndexName)) {
    const SpectrogramIndex old = read_index(dir);
    if (old.stft.nfft == rc.stft.nfft && old.stft.window == rc.stft.window) {
      for (const auto& e : old.entries) previous.emplace(e.id, e);
    }
  }

  SpectrogramIndex idx;
  idx.tags = m.tags;
  idx.stft = rc.stft;
  std::set<std::string> stems;
  std::size_t computed = 0, skipped = 0, dropped = 0;
  for (const auto& e : m.entries) {
    const auto labels = entry_labels(m, e, rc.labels);
    if (std::find(labels.begin(), labels.end(), 1) == labels.end()) {
      err << "warning: dropping '" << e.item_id << "': no positive tags\n";
      ++dropped;
      continue;
    }
    const auto audio_bytes = read_file_bytes(m.resolve(e));
    std::string key(audio_bytes.begin(), audio_bytes.end());
    key += "|" + std::to_string(rc.stft.nfft) + "|" + to_string(rc.stft.window);
    if (e.segment_start_s) {
      key += "|" + std::to_string(*e.segment_start_s) + "|" + std::to_string(*e.segment_end_s);
    }
    const std::string hash = hex64(fnv1a64(key));

    std::string stem = safe_file_stem(e.item_id);
    while (!stems.insert(stem).second) stem += "_";
    const std::string file = "spg/" + stem + ".spg";

    const auto it = previous.find(e.item_id);
    if (it != previous.end() && it->second.hash == hash && it->second.file == file &&
        fs::exists(dir / file)) {
      ++skipped;
    } else {
      const AudioSegment audio =
          slice_segment(decode_wav(audio_bytes, m.resolve(e).string()), e);
      write_spg(dir / file, fixed_spectrogram(audio, rc.stft));
      ++computed;
    }
    idx.entries.push_back({e.item_id, file, labels, hash});
  }
  write_text(dir / kIndexName, index_to_jsonl(idx));
  out << "preprocessed " << computed << ", up to date " << skipped << ", dropped " << dropped
      << " (K = " << rc.stft.K() << ")\n";
  return 0;
}

int cmd_train(const RunConfig& rc, std::ostream& out) {
  const fs::path dir = require_out(rc);
  const LoadedData d = load_data(rc);
  const ModelConfig mc = model_for_data(rc, d);

  std::vector<std::size_t> order(d.examples.size());
  std::iota(order.begin(), order.end(), 0);
  Rng split_rng(Rng::derive(rc.seed, 7));
  split_rng.shuffle(std::span<std::size_t>(order));
  const auto n_valid = static_cast<std::size_t>(
      std::llround(rc.cv.valid_fraction * static_cast<double>(order.size())));
  std::vector<Example> valid, train_set;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_valid ? valid : train_set).push_back(d.examples[order[i]]);
  }

  TrainConfig tc = rc.train;
  tc.checkpoint_dir = dir / "checkpoints";
  const Model initial = init_model(mc, Rng::derive(rc.seed, 3));
  const TrainResult result = train(initial, train_set, valid, tc);

  save_checkpoint(dir / "model.smm", result.model);
  write_text(dir / "history.csv", history_csv(result.history));
  write_text(dir / "cost_curve.svg",
             cost_curve_svg(cost_curve_average(result.history, 10), "Training cost"));
  Json resolved{{"seed", rc.seed}, {"model", to_json(mc)}, {"train", to_json(rc.train)}};
  write_text(dir / "run_config.json", resolved.dump(2) + "\n");
  out << "trained " << result.history.epochs.size() << " epochs on " << train_set.size()
      << " items";
  if (!result.history.epochs.empty()) out << ", final cost " << result.history.epochs.back().cost;
  out << "\n";
  return 0;
}

void write_tables(const fs::path& dir, const MetricSuite& m) {
  write_text(dir / "table_prf.csv", prf_table_csv(m));
  write_text(dir / "table_ranking.csv", ranking_table_csv(m));
}

MetricSuite means_of(const CvSummary& s) {
  std::vector<std::pair<std::string, double>> fields;
  for (const auto& stat : s.metrics) fields.emplace_back(stat.name, stat.mean);
  return metric_suite_from_fields(fields);
}

int cmd_crossval(const RunConfig& rc, bool keep_checkpoints, std::ostream& out) {
  const fs::path dir = require_out(rc);
  const LoadedData d = load_data(rc);
  const ModelConfig mc = model_for_data(rc, d);
  CvOptions opts = rc.cv;
  if (keep_checkpoints) opts.checkpoint_root = dir / "checkpoints";

  const auto t0 = std::chrono::steady_clock::now();
  const CvResult cv = run_crossval(d.examples, mc, rc.train, opts);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  for (const auto& r : cv.reports) {
    write_text(dir / ("fold_" + std::to_string(r.fold_index) + ".json"), fold_report_json(r));
  }
  write_text(dir / "aggregate.json", aggregate_json(cv.summary));
  write_text(dir / "aggregate.csv", aggregate_csv(cv.summary));
  write_tables(dir, means_of(cv.summary));
  out << "10-fold CV on " << d.examples.size() << " items in " << secs << " s: macro-F1 "
      << cv.summary.get("macro_f1").mean << ", micro-F1 " << cv.summary.get("micro_f1").mean
      << ", one-error " << cv.summary.get("one_error").mean << "\n";
  return 0;
}

int cmd_evaluate(const std::string& checkpoint, const std::string& manifest,
                 const std::string& spectrograms, std::optional<double> threshold,
                 const std::string& window, const std::string& out_path, std::ostream& out) {
  const Model model = load_checkpoint(checkpoint);
  RunConfig rc;
  rc.stft = StftConfig::for_side(model.config.input_K, window_from_string(window));
  if (!spectrograms.empty()) rc.spectrograms = spectrograms;
  else if (!manifest.empty()) rc.manifest = manifest;
  const LoadedData d = load_data(rc);
  if (d.K != model.config.input_K || static_cast<int>(d.tags.size()) != model.config.num_tags) {
    throw ConfigError("data (K = " + std::to_string(d.K) + ", " + std::to_string(d.tags.size()) +
                      " tags) does not fit the checkpoint");
  }
  TrainConfig tc;
  tc.threshold = threshold;
  tc.validate();
  const double thr = tc.effective_threshold(model.config);
  const std::size_t L = d.tags.size();
  LabelMatrix truth(d.examples.size(), L), pred(d.examples.size(), L);
  truth.tag_names = d.tags;
  ScoreMatrix scores(d.examples.size(), L);
  for (std::size_t i = 0; i < d.examples.size(); ++i) {
    const auto s = forward(model, d.examples[i].input).scores;
    const auto tags = predict_tags(s, thr);
    for (std::size_t j = 0; j < L; ++j) {
      truth.at(i, j) = d.examples[i].targets[j] > 0.5;
      pred.at(i, j) = tags[j];
      scores.at(i, j) = s[j];
    }
  }
  const std::string report = metrics_report_json(truth, pred, scores);
  if (out_path.empty()) {
    out << report;
  } else {
    write_text(out_path, report);
    out << "wrote " << out_path << "\n";
  }
  return 0;
}

int cmd_experiment(const std::string& kind, const RunConfig& rc, const std::vector<int>& sizes,
                   std::ostream& out) {
  const fs::path dir = require_out(rc);
  if (kind == "size") {
    if (!rc.manifest) throw ConfigError("the size experiment needs a manifest (audio)");
    const Manifest m = load_manifest(*rc.manifest);
    const auto items = load_corpus(m, rc.labels);
    ModelConfig base = rc.model;
    base.num_tags = static_cast<int>(m.tags.size());
    const auto rows = size_experiment(items, sizes.empty() ? rc.experiment_sizes : sizes, base,
                                      rc.train, rc.cv, rc.stft.window);
    const std::string csv = size_table_csv(rows);
    write_text(dir / "table1_size.csv", csv);
    out << csv;
    return 0;
  }
  if (kind == "network") {
    const LoadedData d = load_data(rc);
    std::vector<std::pair<std::string, ModelConfig>> presets;
    for (const auto& name : rc.experiment_presets) {
      const int tags = static_cast<int>(d.tags.size());
      if (name == "simple") presets.emplace_back("Sim", ModelConfig::simple_preset(d.K, tags));
      else if (name == "complex") presets.emplace_back("Com", ModelConfig::complex_preset(d.K, tags));
      else throw ConfigError("unknown preset '" + name + "'");
    }
    const auto rows = network_experiment(d.examples, presets, rc.train, rc.cv);
    const std::string csv = network_table_csv(rows);
    write_text(dir / "table2_network.csv", csv);
    out << csv;
    return 0;
  }
  throw ConfigError("experiment kind must be 'size' or 'network', got '" + kind + "'");
}

int cmd_report(const std::string& run_dir, const std::string& history, int window,
               std::ostream& out) {
  if (run_dir.empty() && history.empty()) throw ConfigError("report needs --run or --history");
  if (!run_dir.empty()) {
    const auto bytes = read_file_bytes(fs::path(run_dir) / "aggregate.json");
    const auto j = nlohmann::json::parse(std::string(bytes.begin(), bytes.end()));
    std::vector<std::pair<std::string, double>> fields;
    for (const auto& [name, stat] : j.at("metrics").items()) {
      const auto& mean = stat.at("mean");
      fields.emplace_back(name, mean.is_null() ? std::nan("") : mean.get<double>());
    }
    const MetricSuite m = metric_suite_from_fields(fields);
    write_tables(run_dir, m);
    out << prf_table_csv(m) << "\n" << ranking_table_csv(m);
  }
  if (!history.empty()) {
    const auto bytes = read_file_bytes(history);
    std::istringstream in(std::string(bytes.begin(), bytes.end()));
    std::string line;
    std::getline(in, line);
    TrainHistory h;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      EpochRecord rec;
      const auto c1 = line.find(','), c2 = line.find(',', c1 + 1);
      rec.epoch = std::stoi(line.substr(0, c1));
      rec.cost = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
      h.epochs.push_back(rec);
    }
    fs::path svg = fs::path(history).replace_extension(".svg");
    write_text(svg, cost_curve_svg(cost_curve_average(h, window), "Training cost"));
    out << "wrote " << svg.string() << "\n";
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"specmer: spectrogram CNN for multi-label music emotion tagging"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic tagged-audio corpus");
  int synth_items = 200, synth_tags = 6;
  std::uint64_t synth_seed = 0;
  std::string synth_out;
  SynthOptions synth_opts;
  synth->add_option("--items", synth_items, "Number of items");
  synth->add_option("--tags", synth_tags, "Number of tags");
  synth->add_option("--seed", synth_seed, "Corpus seed");
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--sample-rate", synth_opts.sample_rate, "Sample rate (Hz)");
  synth->add_option("--duration", synth_opts.duration_s, "Item duration (s)");
  synth->add_option("--tag-probability", synth_opts.tag_probability,
                    "Probability that an item carries each tag");

  // preprocess
  auto* preprocess = app.add_subcommand("preprocess", "Materialize K x K spectrograms (SPG1)");
  CommonFlags pre_flags;
  pre_flags.add_to(preprocess);
  int pre_nfft = 0;
  std::string pre_window;
  preprocess->add_option("--nfft", pre_nfft, "FFT length (overrides config; 0 = config)");
  preprocess->add_option("--window", pre_window, "hann or rectangular (overrides config)");

  // train
  auto* train_cmd = app.add_subcommand("train", "Train one model; writes checkpoints, history, SVG");
  CommonFlags train_flags;
  train_flags.add_to(train_cmd);

  // crossval
  auto* crossval = app.add_subcommand("crossval", "Ten-fold cross-validation");
  CommonFlags cv_flags;
  cv_flags.add_to(crossval);
  bool cv_checkpoints = false;
  crossval->add_flag("--checkpoints", cv_checkpoints, "Keep per-epoch checkpoints of every fold");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Score a checkpoint on a labelled set");
  std::string ev_checkpoint, ev_manifest, ev_spectrograms, ev_window = "hann", ev_out;
  double ev_threshold = 0.0;
  evaluate->add_option("--checkpoint", ev_checkpoint, "SMM1 checkpoint")->required();
  evaluate->add_option("--manifest", ev_manifest, "JSON-lines manifest");
  evaluate->add_option("--spectrograms", ev_spectrograms, "Preprocessed spectrogram directory");
  auto* ev_thr_opt =
      evaluate->add_option("--threshold", ev_threshold, "Tag threshold (default: per head)");
  evaluate->add_option("--window", ev_window, "STFT window when reading a manifest");
  evaluate->add_option("--out", ev_out, "Report path (default: stdout)");

  // experiment
  auto* experiment = app.add_subcommand("experiment", "Spectrogram-size or network experiment");
  std::string exp_kind;
  std::vector<int> exp_sizes;
  experiment->add_option("kind", exp_kind, "size or network")->required();
  CommonFlags exp_flags;
  exp_flags.add_to(experiment);
  experiment->add_option("--sizes", exp_sizes, "Spectrogram sides K (size experiment)");

  // report
  auto* report = app.add_subcommand("report", "Render tables and cost curves from outputs");
  std::string rep_run, rep_history;
  int rep_window = 10;
  report->add_option("--run", rep_run, "crossval output directory");
  report->add_option("--history", rep_history, "history.csv to plot");
  report->add_option("--window", rep_window, "Epochs per cost-curve point");

  std::vector<std::string> argv_storage{"specmer"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_storage) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*synth) {
      return cmd_synth(synth_items, synth_tags, synth_seed, synth_out, synth_opts, out);
    }
    if (*preprocess) {
      RunConfig rc = pre_flags.resolve();
      if (pre_nfft > 0) rc.stft.nfft = pre_nfft;
      if (!pre_window.empty()) rc.stft.window = window_from_string(pre_window);
      rc.stft.validate();
      return cmd_preprocess(rc, out, err);
    }
    if (*train_cmd) return cmd_train(train_flags.resolve(), out);
    if (*crossval) return cmd_crossval(cv_flags.resolve(), cv_checkpoints, out);
    if (*evaluate) {
      return cmd_evaluate(ev_checkpoint, ev_manifest, ev_spectrograms,
                          ev_thr_opt->count() ? std::optional<double>(ev_threshold) : std::nullopt,
                          ev_window, ev_out, out);
    }
    if (*experiment) return cmd_experiment(exp_kind, exp_flags.resolve(), exp_sizes, out);
    if (*report) return cmd_report(rep_run, rep_history, rep_window, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace specmer
