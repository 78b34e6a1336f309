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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "specmer/dataset.hpp"
#include "specmer/metrics.hpp"
#include "specmer/model.hpp"
#include "specmer/trainer.hpp"

namespace specmer {

struct FoldPlan {
  int fold_index = 0;
  std::vector<std::string> train_ids;
  std::vector<std::string> valid_ids;
  std::vector<std::string> test_ids;
  std::uint64_t seed = 0;
};

// Seeded shuffle cut into ten contiguous test blocks of floor/ceil(N/10)
// items. Inside each fold, round(valid_fraction * rest) of the remaining
// items (in a fold-seeded order) are held out for validation.
std::vector<FoldPlan> tenfold_split(const std::vector<std::string>& item_ids,
                                    std::uint64_t seed, double valid_fraction = 0.1);

struct CvOptions {
  double valid_fraction = 0.1;
  int benchmark_epochs = 10;
  // 0: take SPECMER_THREADS, else the hardware concurrency.
  int threads = 0;
  // When set, fold k checkpoints into <root>/fold_<k>/.
  std::optional<std::filesystem::path> checkpoint_root;
};

struct FoldReport {
  int fold_index = 0;
  MetricSuite metrics;              // test metrics averaged over benchmark epochs
  std::vector<int> benchmark_epochs;  // 1-based
  std::vector<double> costs;
  std::vector<double> val_macro_f1;
};

// Trains on plan.train, picks the benchmark epochs on plan.valid and reports
// the test metrics of those epochs' models, averaged.
FoldReport run_fold(const FoldPlan& plan, const ModelConfig& model_config,
                    const TrainConfig& train_config, std::span<const Example> corpus,
                    const CvOptions& options = {});

struct MetricStat {
  std::string name;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; 0 for a single report
  // Folds where the metric is defined (finite). Mean and stddev are taken
  // over these and are NaN when there are none.
  int defined_folds = 0;
};

struct CvSummary {
  int folds = 0;
  std::vector<MetricStat> metrics;

  const MetricStat& get(const std::string& name) const;
};

// Unweighted mean and standard deviation of every metric across reports.
CvSummary aggregate(const std::vector<FoldReport>& reports);

struct CvResult {
  std::vector<FoldPlan> plans;
  std::vector<FoldReport> reports;
  CvSummary summary;
};

// Ten folds, run concurrently up to the thread cap; each fold's result does
// not depend on scheduling.
CvResult run_crossval(std::span<const Example> corpus, const ModelConfig& model_config,
                      const TrainConfig& train_config, const CvOptions& options = {});

int resolve_threads(int requested);

std::string fold_report_json(const FoldReport& report);
std::string aggregate_json(const CvSummary& summary);
// metric,mean,stddev
std::string aggregate_csv(const CvSummary& summary);

struct SizeRow {
  int K = 0;
  double macro_f1 = 0.0;
  double micro_f1 = 0.0;
  double wall_time_s = 0.0;
};

// Full pipeline (spectrograms + ten-fold CV) per spectrogram side K; the
// model's input_K follows each K.
std::vector<SizeRow> size_experiment(const std::vector<LabeledItem>& items,
                                     const std::vector<int>& sizes,
                                     const ModelConfig& base_config,
                                     const TrainConfig& train_config,
                                     const CvOptions& options = {},
                                     Window window = Window::hann);
// Experiment,macro_f1,micro_f1,time_s
std::string size_table_csv(const std::vector<SizeRow>& rows);

struct NetworkRow {
  std::string preset;
  PRF macro;
};

// Named model configs, defaulting to {simple, complex} at the corpus K.
std::vector<std::pair<std::string, ModelConfig>> default_network_presets(int K, int num_tags);

std::vector<NetworkRow> network_experiment(
    std::span<const Example> corpus,
    const std::vector<std::pair<std::string, ModelConfig>>& presets,
    const TrainConfig& train_config, const CvOptions& options = {});
// Experiment,P,R,F
std::string network_table_csv(const std::vector<NetworkRow>& rows);

}  // namespace specmer
