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
#include <optional>
#include <string>
#include <vector>

namespace specmer {

// N items x L tags, entries in {0, 1}.
struct LabelMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> values;
  std::vector<std::string> tag_names;

  LabelMatrix() = default;
  LabelMatrix(std::size_t rows_, std::size_t cols_);
  static LabelMatrix from_rows(const std::vector<std::vector<std::uint8_t>>& rows);

  std::uint8_t at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
  std::uint8_t& at(std::size_t i, std::size_t j) { return values[i * cols + j]; }
};

// N items x L tags of real-valued scores.
struct ScoreMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  ScoreMatrix() = default;
  ScoreMatrix(std::size_t rows_, std::size_t cols_);
  static ScoreMatrix from_rows(const std::vector<std::vector<double>>& rows);

  double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
  double& at(std::size_t i, std::size_t j) { return values[i * cols + j]; }
};

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Per-tag precision, recall and F1 with 0 for any zero denominator, averaged
// without weights.
PRF prf_macro(const LabelMatrix& truth, const LabelMatrix& pred);
// Precision, recall and F1 from TP/FP/FN pooled over all tags.
PRF prf_micro(const LabelMatrix& truth, const LabelMatrix& pred);
// Fraction of cells where pred differs from truth.
double hamming_loss(const LabelMatrix& truth, const LabelMatrix& pred);
// Mean per-tag ROC AUC (Mann-Whitney, ties count 1/2) over tags having both
// positives and negatives. Throws when every tag is degenerate.
double auc_macro(const LabelMatrix& truth, const ScoreMatrix& scores);
// Mean per-tag average precision over tags with at least one positive.
// Tied scores are ranked together, as a single threshold.
double average_precision(const LabelMatrix& truth, const ScoreMatrix& scores);
// Fraction of items whose top-scored tag (lowest index on ties) is not true.
double one_error(const LabelMatrix& truth, const ScoreMatrix& scores);

// Per-tag ROC AUC and AP; nullopt where the tag is degenerate for the metric.
std::optional<double> tag_auc(const LabelMatrix& truth, const ScoreMatrix& scores,
                              std::size_t tag);
std::optional<double> tag_average_precision(const LabelMatrix& truth,
                                            const ScoreMatrix& scores, std::size_t tag);

struct MetricSuite {
  PRF macro;
  PRF micro;
  double hamming_loss = 0.0;
  double auc = 0.0;
  double average_precision = 0.0;
  double one_error = 0.0;
};

MetricSuite evaluate_all(const LabelMatrix& truth, const LabelMatrix& pred,
                         const ScoreMatrix& scores);

// Named view used by reports and the fold aggregator, in a fixed order.
std::vector<std::pair<std::string, double>> metric_fields(const MetricSuite& m);
MetricSuite metric_suite_from_fields(const std::vector<std::pair<std::string, double>>& fields);

// JSON document with a per-tag table and the macro/micro aggregates.
std::string metrics_report_json(const LabelMatrix& truth, const LabelMatrix& pred,
                                const ScoreMatrix& scores);
// "Description,P,R,F" with macro and micro rows.
std::string prf_table_csv(const MetricSuite& m);
// "Hamloss,AUC,AP,One-error".
std::string ranking_table_csv(const MetricSuite& m);

}  // namespace specmer
