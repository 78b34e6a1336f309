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

#include "specmer/cv_harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "specmer/errors.hpp"
#include "specmer/rng.hpp"

namespace specmer {
namespace {

using OJson = nlohmann::ordered_json;

constexpr int kFolds = 10;

std::vector<const Example*> select(const std::map<std::string, const Example*>& index,
                                   const std::vector<std::string>& ids) {
  std::vector<const Example*> out;
  for (const auto& id : ids) {
    const auto it = index.find(id);
    if (it == index.end()) throw ConfigError("fold references unknown item '" + id + "'");
    out.push_back(it->second);
  }
  return out;
}

std::vector<Example> copy_of(const std::vector<const Example*>& ptrs) {
  std::vector<Example> out;
  out.reserve(ptrs.size());
  for (const Example* e : ptrs) out.push_back(*e);
  return out;
}

MetricSuite score_set(const Model& model, std::span<const Example> set, double threshold) {
  const std::size_t L = static_cast<std::size_t>(model.config.num_tags);
  LabelMatrix truth(set.size(), L), pred(set.size(), L);
  ScoreMatrix scores(set.size(), L);
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto s = forward(model, set[i].input).scores;
    const auto tags = predict_tags(s, threshold);
    for (std::size_t j = 0; j < L; ++j) {
      truth.at(i, j) = set[i].targets[j] > 0.5;
      pred.at(i, j) = tags[j];
      scores.at(i, j) = s[j];
    }
  }
  // A small test fold can leave AUC or AP undefined for every tag; such a
  // fold reports NaN and aggregate() averages over the folds that define it.
  MetricSuite m;
  m.macro = prf_macro(truth, pred);
  m.micro = prf_micro(truth, pred);
  m.hamming_loss = hamming_loss(truth, pred);
  m.one_error = one_error(truth, scores);
  bool auc_defined = false, ap_defined = false;
  for (std::size_t j = 0; j < L; ++j) {
    auc_defined |= tag_auc(truth, scores, j).has_value();
    ap_defined |= tag_average_precision(truth, scores, j).has_value();
  }
  m.auc = auc_defined ? auc_macro(truth, scores) : std::nan("");
  m.average_precision = ap_defined ? average_precision(truth, scores) : std::nan("");
  return m;
}

MetricSuite mean_suite(const std::vector<MetricSuite>& suites) {
  std::vector<std::pair<std::string, double>> sum = metric_fields(MetricSuite{});
  for (const auto& s : suites) {
    const auto f = metric_fields(s);
    for (std::size_t i = 0; i < f.size(); ++i) sum[i].second += f[i].second;
  }
  for (auto& [name, v] : sum) v /= static_cast<double>(suites.size());
  return metric_suite_from_fields(sum);
}

template <typename Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int count = std::max(1, std::min(threads, n));
  if (count == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < count; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

std::vector<FoldPlan> tenfold_split(const std::vector<std::string>& item_ids,
                                    std::uint64_t seed, double valid_fraction) {
  const std::size_t N = item_ids.size();
  if (N < kFolds) {
    throw CorpusTooSmallError("ten-fold split needs at least 10 items, got " + std::to_string(N));
  }
  if (!(valid_fraction >= 0 && valid_fraction < 1)) {
    throw ConfigError("valid_fraction must lie in [0, 1)");
  }
  if (std::set<std::string>(item_ids.begin(), item_ids.end()).size() != N) {
    throw ConfigError("item ids must be unique");
  }
  std::vector<std::string> order = item_ids;
  Rng rng(seed);
  rng.shuffle(std::span<std::string>(order));

  std::vector<FoldPlan> plans;
  for (int k = 0; k < kFolds; ++k) {
    const std::size_t begin = N * k / kFolds, end = N * (k + 1) / kFolds;
    FoldPlan p;
    p.fold_index = k;
    p.seed = Rng::derive(seed, static_cast<std::uint64_t>(k));
    p.test_ids.assign(order.begin() + begin, order.begin() + end);
    std::vector<std::string> rest(order.begin(), order.begin() + begin);
    rest.insert(rest.end(), order.begin() + end, order.end());
    Rng fold_rng(p.seed);
    fold_rng.shuffle(std::span<std::string>(rest));
    auto n_valid = static_cast<std::size_t>(std::llround(valid_fraction * rest.size()));
    n_valid = std::min(n_valid, rest.size() - 1);
    p.valid_ids.assign(rest.begin(), rest.begin() + n_valid);
    p.train_ids.assign(rest.begin() + n_valid, rest.end());
    plans.push_back(std::move(p));
  }
  return plans;
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("SPECMER_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

FoldReport run_fold(const FoldPlan& plan, const ModelConfig& model_config,
                    const TrainConfig& train_config, std::span<const Example> corpus,
                    const CvOptions& options) {
  const std::string where = "fold " + std::to_string(plan.fold_index) + ": ";
  try {
    std::map<std::string, const Example*> index;
    for (const Example& e : corpus) index.emplace(e.id, &e);
    const auto train_set = copy_of(select(index, plan.train_ids));
    const auto valid_set = copy_of(select(index, plan.valid_ids));
    const auto test_set = copy_of(select(index, plan.test_ids));

    TrainConfig tc = train_config;
    tc.seed = Rng::derive(train_config.seed, 10 + static_cast<std::uint64_t>(plan.fold_index));
    if (options.checkpoint_root) {
      tc.checkpoint_dir = *options.checkpoint_root / ("fold_" + std::to_string(plan.fold_index));
    }
    const Model initial = init_model(
        model_config, Rng::derive(train_config.seed, 50 + static_cast<std::uint64_t>(plan.fold_index)));
    const double threshold = tc.effective_threshold(model_config);

    // Test metrics of every epoch's model; only the benchmark epochs are
    // kept in the report.
    std::vector<MetricSuite> per_epoch;
    const TrainResult result = train(initial, train_set, valid_set, tc,
                                     [&](int, const Model& m) {
                                       per_epoch.push_back(score_set(m, test_set, threshold));
                                     });

    FoldReport report;
    report.fold_index = plan.fold_index;
    report.costs = result.history.costs();
    report.val_macro_f1 = result.history.val_macro_f1();
    std::vector<int> bench;
    if (!report.val_macro_f1.empty()) {
      bench = select_benchmark_epochs(report.val_macro_f1, options.benchmark_epochs);
    } else {
      const int total = static_cast<int>(per_epoch.size());
      for (int i = std::max(0, total - options.benchmark_epochs); i < total; ++i) bench.push_back(i);
    }
    if (bench.empty()) throw ConfigError("no epochs were trained");
    std::vector<MetricSuite> chosen;
    for (int e : bench) {
      chosen.push_back(per_epoch[e]);
      report.benchmark_epochs.push_back(e + 1);
    }
    report.metrics = mean_suite(chosen);
    return report;
  } catch (const DivergenceError& e) {
    throw DivergenceError(where + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(where + e.what());
  } catch (const ShapeError& e) {
    throw ShapeError(where + e.what());
  }
}

const MetricStat& CvSummary::get(const std::string& name) const {
  for (const auto& m : metrics) {
    if (m.name == name) return m;
  }
  throw ConfigError("no metric named '" + name + "'");
}

CvSummary aggregate(const std::vector<FoldReport>& reports) {
  if (reports.empty()) throw ConfigError("nothing to aggregate");
  CvSummary s;
  s.folds = static_cast<int>(reports.size());
  const auto names = metric_fields(MetricSuite{});
  for (std::size_t i = 0; i < names.size(); ++i) {
    std::vector<double> values;
    for (const auto& r : reports) {
      const double v = metric_fields(r.metrics)[i].second;
      if (std::isfinite(v)) values.push_back(v);
    }
    MetricStat stat{names[i].first, std::nan(""), std::nan(""), static_cast<int>(values.size())};
    if (!values.empty()) {
      const double n = static_cast<double>(values.size());
      double sum = 0.0;
      for (double v : values) sum += v;
      stat.mean = sum / n;
      double ss = 0.0;
      for (double v : values) ss += (v - stat.mean) * (v - stat.mean);
      stat.stddev = values.size() > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
    }
    s.metrics.push_back(stat);
  }
  return s;
}

CvResult run_crossval(std::span<const Example> corpus, const ModelConfig& model_config,
                      const TrainConfig& train_config, const CvOptions& options) {
  std::vector<std::string> ids;
  for (const Example& e : corpus) ids.push_back(e.id);
  CvResult r;
  r.plans = tenfold_split(ids, train_config.seed, options.valid_fraction);
  r.reports.resize(r.plans.size());
  parallel_for(static_cast<int>(r.plans.size()), resolve_threads(options.threads), [&](int k) {
    r.reports[k] = run_fold(r.plans[k], model_config, train_config, corpus, options);
  });
  r.summary = aggregate(r.reports);
  return r;
}

std::string fold_report_json(const FoldReport& report) {
  OJson j;
  j["fold_index"] = report.fold_index;
  j["benchmark_epochs"] = report.benchmark_epochs;
  auto& m = j["metrics"];
  for (const auto& [name, v] : metric_fields(report.metrics)) m[name] = v;
  j["costs"] = report.costs;
  j["val_macro_f1"] = report.val_macro_f1;
  return j.dump(2) + "\n";
}

std::string aggregate_json(const CvSummary& summary) {
  OJson j;
  j["folds"] = summary.folds;
  auto& m = j["metrics"];
  for (const auto& stat : summary.metrics) {
    auto& entry = m[stat.name];
    entry["mean"] = stat.mean;
    entry["stddev"] = stat.stddev;
    if (stat.defined_folds != summary.folds) entry["defined_folds"] = stat.defined_folds;
  }
  return j.dump(2) + "\n";
}

std::string aggregate_csv(const CvSummary& summary) {
  std::ostringstream out;
  out.precision(17);
  out << "metric,mean,stddev\n";
  for (const auto& s : summary.metrics) out << s.name << ',' << s.mean << ',' << s.stddev << '\n';
  return out.str();
}

std::vector<SizeRow> size_experiment(const std::vector<LabeledItem>& items,
                                     const std::vector<int>& sizes,
                                     const ModelConfig& base_config,
                                     const TrainConfig& train_config, const CvOptions& options,
                                     Window window) {
  std::vector<SizeRow> rows;
  for (int K : sizes) {
    const auto t0 = std::chrono::steady_clock::now();
    const StftConfig stft = StftConfig::for_side(K, window);
    const auto examples = make_examples(items, stft);
    ModelConfig mc = base_config;
    mc.input_K = K;
    const CvResult cv = run_crossval(examples, mc, train_config, options);
    const auto t1 = std::chrono::steady_clock::now();
    rows.push_back({K, cv.summary.get("macro_f1").mean, cv.summary.get("micro_f1").mean,
                    std::chrono::duration<double>(t1 - t0).count()});
  }
  return rows;
}

std::string size_table_csv(const std::vector<SizeRow>& rows) {
  std::ostringstream out;
  out << "Experiment,macro_f1,micro_f1,time_s\n";
  for (const auto& r : rows) {
    out << "Size" << r.K << ',' << std::fixed;
    out.precision(3);
    out << r.macro_f1 << ',' << r.micro_f1 << ',';
    out.precision(2);
    out << r.wall_time_s << '\n';
    out << std::defaultfloat;
  }
  return out.str();
}

std::vector<std::pair<std::string, ModelConfig>> default_network_presets(int K, int num_tags) {
  return {{"Sim", ModelConfig::simple_preset(K, num_tags)},
          {"Com", ModelConfig::complex_preset(K, num_tags)}};
}

std::vector<NetworkRow> network_experiment(
    std::span<const Example> corpus,
    const std::vector<std::pair<std::string, ModelConfig>>& presets,
    const TrainConfig& train_config, const CvOptions& options) {
  std::vector<NetworkRow> rows;
  for (const auto& [name, config] : presets) {
    const CvResult cv = run_crossval(corpus, config, train_config, options);
    rows.push_back({name,
                    {cv.summary.get("macro_precision").mean, cv.summary.get("macro_recall").mean,
                     cv.summary.get("macro_f1").mean}});
  }
  return rows;
}

std::string network_table_csv(const std::vector<NetworkRow>& rows) {
  std::ostringstream out;
  out << "Experiment,P,R,F\n" << std::fixed;
  out.precision(3);
  for (const auto& r : rows) {
    out << r.preset << ',' << r.macro.precision << ',' << r.macro.recall << ',' << r.macro.f1 << '\n';
  }
  return out.str();
}

}  // namespace specmer
