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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "specmer/loss.hpp"
#include "specmer/model.hpp"

namespace specmer {

struct TrainConfig {
  int epochs = 30;
  int batch_size = 16;
  double learning_rate = 0.01;
  double momentum = 0.9;
  // Unset: 0.5 for the sigmoid head, 1 / num_tags for the softmax head.
  std::optional<double> threshold;
  std::uint64_t seed = 0;
  // Unset: the loss that pairs with the model's head.
  std::optional<LossKind> loss;
  // When set, an SMM1 checkpoint is written after every epoch.
  std::optional<std::filesystem::path> checkpoint_dir;

  void validate() const;
  double effective_threshold(const ModelConfig& model) const;
  LossKind effective_loss(const ModelConfig& model) const;
};

// One network input with its 0/1 tag targets.
struct Example {
  std::string id;
  Tensor input;                // [1, K, K]
  std::vector<double> targets; // num_tags entries in {0, 1}
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  double cost = 0.0;
  std::optional<double> val_macro_f1;
  std::optional<double> val_micro_f1;
  std::optional<std::filesystem::path> checkpoint;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;

  std::vector<double> costs() const;
  // Validation macro-F1 per epoch; empty when no validation set was used.
  std::vector<double> val_macro_f1() const;
};

// Observer run after each epoch with the current model; used by the
// cross-validation harness to score held-out data per epoch.
using EpochCallback = std::function<void(int epoch, const Model& model)>;

struct TrainResult {
  Model model;
  TrainHistory history;
};

// Mini-batch SGD with momentum. Parameter init, shuffle order and dropout
// masks all derive from config.seed, so repeated calls are bit-identical.
// `model` is the initialized starting point.
TrainResult train(const Model& model, std::span<const Example> train_set,
                  std::span<const Example> valid_set, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

// Tag j is set iff score_j > threshold; when none is, the argmax tag is set.
std::vector<std::uint8_t> predict_tags(std::span<const double> scores, double threshold);

// Scores for every example under inference mode.
std::vector<std::vector<double>> predict_scores(const Model& model,
                                                std::span<const Example> examples);

struct CostPoint {
  int index = 0;  // 1-based window number
  double mean_cost = 0.0;
};

// Means over consecutive non-overlapping windows of `window` epochs; a
// trailing partial window is averaged over its actual length.
std::vector<CostPoint> cost_curve_average(const TrainHistory& history, int window = 10);

// 0-based indices of the n consecutive epochs with maximal mean validation
// macro-F1, earliest on ties. All epochs when fewer than n exist.
std::vector<int> select_benchmark_epochs(std::span<const double> valid_macro_f1, int n = 10);

// epoch,cost,val_macro_f1,val_micro_f1
std::string history_csv(const TrainHistory& history);

}  // namespace specmer
