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

#include "specmer/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "specmer/errors.hpp"
#include "specmer/metrics.hpp"

namespace specmer {
namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void check_examples(const Model& model, std::span<const Example> set, const char* which) {
  const auto K = static_cast<std::size_t>(model.config.input_K);
  const std::vector<std::size_t> shape{1, K, K};
  for (const Example& ex : set) {
    if (ex.input.shape != shape) {
      throw ConfigError(std::string(which) + " item '" + ex.id + "' has shape " +
                        ex.input.shape_string() + ", model expects input_K " +
                        std::to_string(K));
    }
    if (ex.targets.size() != static_cast<std::size_t>(model.config.num_tags)) {
      throw ConfigError(std::string(which) + " item '" + ex.id + "' has " +
                        std::to_string(ex.targets.size()) + " targets, model has " +
                        std::to_string(model.config.num_tags) + " tags");
    }
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 0) throw ConfigError("epochs must be non-negative");
  if (batch_size < 1) throw ConfigError("batch_size must be positive");
  if (!(learning_rate > 0)) throw ConfigError("learning_rate must be positive");
  if (!(momentum >= 0 && momentum < 1)) throw ConfigError("momentum must lie in [0, 1)");
  if (threshold && !(*threshold > 0 && *threshold < 1)) {
    throw ConfigError("threshold must lie strictly inside (0, 1)");
  }
}

double TrainConfig::effective_threshold(const ModelConfig& model) const {
  if (threshold) return *threshold;
  return model.head == HeadKind::softmax_threshold ? 1.0 / model.num_tags : 0.5;
}

LossKind TrainConfig::effective_loss(const ModelConfig& model) const {
  return loss ? *loss : default_loss(model.head);
}

std::vector<double> TrainHistory::costs() const {
  std::vector<double> c;
  for (const auto& e : epochs) c.push_back(e.cost);
  return c;
}

std::vector<double> TrainHistory::val_macro_f1() const {
  std::vector<double> v;
  for (const auto& e : epochs) {
    if (e.val_macro_f1) v.push_back(*e.val_macro_f1);
  }
  return v;
}

std::vector<std::uint8_t> predict_tags(std::span<const double> scores, double threshold) {
  std::vector<std::uint8_t> tags(scores.size(), 0);
  bool any = false;
  for (std::size_t j = 0; j < scores.size(); ++j) {
    if (scores[j] > threshold) {
      tags[j] = 1;
      any = true;
    }
  }
  if (!any && !scores.empty()) {
    tags[std::max_element(scores.begin(), scores.end()) - scores.begin()] = 1;
  }
  return tags;
}

std::vector<std::vector<double>> predict_scores(const Model& model,
                                                std::span<const Example> examples) {
  std::vector<std::vector<double>> out;
  out.reserve(examples.size());
  for (const Example& ex : examples) out.push_back(forward(model, ex.input).scores);
  return out;
}

TrainResult train(const Model& initial, std::span<const Example> train_set,
                  std::span<const Example> valid_set, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  config.validate();
  initial.config.validate();
  if (train_set.empty()) throw ConfigError("training set is empty");
  check_examples(initial, train_set, "training");
  check_examples(initial, valid_set, "validation");

  TrainResult result{initial, {}};
  Model& model = result.model;
  const LossKind loss = config.effective_loss(model.config);
  const double threshold = config.effective_threshold(model.config);

  Rng shuffle_rng(Rng::derive(config.seed, 1));
  Rng dropout_rng(Rng::derive(config.seed, 2));
  ModelParams velocity = zeros_like(model.params);
  ModelParams grads = zeros_like(model.params);

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    double total_loss = 0.0;
    try {
      for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
        const std::size_t end = std::min(order.size(), start + config.batch_size);
        for (auto block : parameter_blocks(grads)) std::fill(block.begin(), block.end(), 0.0);
        for (std::size_t b = start; b < end; ++b) {
          const Example& ex = train_set[order[b]];
          const ForwardResult fr = forward(model, ex.input, true, &dropout_rng);
          const LossValue lv = loss_and_grad(loss, fr.logits, ex.targets);
          total_loss += lv.loss;
          backward_accumulate(model, fr.cache, lv.grad_logits, grads);
        }
        const double step = config.learning_rate / double(end - start);
        auto p = parameter_blocks(model.params);
        auto v = parameter_blocks(velocity);
        const auto g = parameter_blocks(std::as_const(grads));
        for (std::size_t k = 0; k < p.size(); ++k) {
          for (std::size_t i = 0; i < p[k].size(); ++i) {
            v[k][i] = config.momentum * v[k][i] - step * g[k][i];
            p[k][i] += v[k][i];
          }
        }
      }
    } catch (const DivergenceError&) {
      throw DivergenceError("training diverged in epoch " + std::to_string(epoch));
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.cost = total_loss / double(train_set.size());
    if (!std::isfinite(rec.cost)) {
      throw DivergenceError("non-finite cost in epoch " + std::to_string(epoch));
    }
    if (!valid_set.empty()) {
      LabelMatrix truth(valid_set.size(), model.config.num_tags);
      LabelMatrix pred(valid_set.size(), model.config.num_tags);
      for (std::size_t i = 0; i < valid_set.size(); ++i) {
        const auto scores = forward(model, valid_set[i].input).scores;
        const auto tags = predict_tags(scores, threshold);
        for (std::size_t j = 0; j < tags.size(); ++j) {
          truth.at(i, j) = valid_set[i].targets[j] > 0.5;
          pred.at(i, j) = tags[j];
        }
      }
      rec.val_macro_f1 = prf_macro(truth, pred).f1;
      rec.val_micro_f1 = prf_micro(truth, pred).f1;
    }
    if (config.checkpoint_dir) {
      char name[32];
      std::snprintf(name, sizeof name, "model_epoch_%03d.smm", epoch);
      rec.checkpoint = *config.checkpoint_dir / name;
      save_checkpoint(*rec.checkpoint, model);
    }
    result.history.epochs.push_back(rec);
    if (on_epoch) on_epoch(epoch, model);
  }
  return result;
}

std::vector<CostPoint> cost_curve_average(const TrainHistory& history, int window) {
  if (window < 1) throw ConfigError("cost window must be positive");
  const auto costs = history.costs();
  std::vector<CostPoint> points;
  for (std::size_t start = 0; start < costs.size(); start += window) {
    const std::size_t end = std::min(costs.size(), start + static_cast<std::size_t>(window));
    double sum = 0.0;
    for (std::size_t i = start; i < end; ++i) sum += costs[i];
    points.push_back({static_cast<int>(points.size()) + 1, sum / double(end - start)});
  }
  return points;
}

std::vector<int> select_benchmark_epochs(std::span<const double> valid_macro_f1, int n) {
  if (n < 1) throw ConfigError("benchmark window must be positive");
  const auto total = static_cast<int>(valid_macro_f1.size());
  std::vector<int> epochs;
  if (total <= n) {
    for (int i = 0; i < total; ++i) epochs.push_back(i);
    return epochs;
  }
  int best_start = 0;
  double best = -1.0;
  for (int s = 0; s + n <= total; ++s) {
    double sum = 0.0;
    for (int i = s; i < s + n; ++i) sum += valid_macro_f1[i];
    if (sum > best) {
      best = sum;
      best_start = s;
    }
  }
  for (int i = best_start; i < best_start + n; ++i) epochs.push_back(i);
  return epochs;
}

std::string history_csv(const TrainHistory& history) {
  std::string out = "epoch,cost,val_macro_f1,val_micro_f1\n";
  for (const auto& e : history.epochs) {
    out += std::to_string(e.epoch) + "," + fmt_double(e.cost) + ",";
    if (e.val_macro_f1) out += fmt_double(*e.val_macro_f1);
    out += ",";
    if (e.val_micro_f1) out += fmt_double(*e.val_micro_f1);
    out += "\n";
  }
  return out;
}

}  // namespace specmer
