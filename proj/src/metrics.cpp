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

#include "specmer/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "specmer/errors.hpp"

namespace specmer {
namespace {

void check_same_shape(std::size_t r1, std::size_t c1, std::size_t r2, std::size_t c2) {
  if (r1 != r2 || c1 != c2) {
    throw ShapeError("metric inputs differ in shape: " + std::to_string(r1) + "x" +
                     std::to_string(c1) + " vs " + std::to_string(r2) + "x" +
                     std::to_string(c2));
  }
}

double safe_ratio(double num, double den) { return den > 0 ? num / den : 0.0; }

PRF prf_from_counts(double tp, double fp, double fn) {
  PRF r;
  r.precision = safe_ratio(tp, tp + fp);
  r.recall = safe_ratio(tp, tp + fn);
  r.f1 = safe_ratio(2.0 * r.precision * r.recall, r.precision + r.recall);
  return r;
}

struct Counts {
  std::size_t tp = 0, fp = 0, fn = 0;
};

Counts tag_counts(const LabelMatrix& truth, const LabelMatrix& pred, std::size_t j) {
  Counts c;
  for (std::size_t i = 0; i < truth.rows; ++i) {
    const bool t = truth.at(i, j), p = pred.at(i, j);
    c.tp += t && p;
    c.fp += !t && p;
    c.fn += t && !p;
  }
  return c;
}

// Item indices of column `tag` ordered by descending score (stable).
std::vector<std::size_t> ranking(const ScoreMatrix& scores, std::size_t tag) {
  std::vector<std::size_t> order(scores.rows);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores.at(a, tag) > scores.at(b, tag);
  });
  return order;
}

}  // namespace

LabelMatrix::LabelMatrix(std::size_t rows_, std::size_t cols_)
    : rows(rows_), cols(cols_), values(rows_ * cols_, 0) {}

LabelMatrix LabelMatrix::from_rows(const std::vector<std::vector<std::uint8_t>>& rows) {
  LabelMatrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols) throw ShapeError("ragged label rows");
    for (std::size_t j = 0; j < m.cols; ++j) {
      if (rows[i][j] > 1) throw ShapeError("label entries must be 0 or 1");
      m.at(i, j) = rows[i][j];
    }
  }
  return m;
}

ScoreMatrix::ScoreMatrix(std::size_t rows_, std::size_t cols_)
    : rows(rows_), cols(cols_), values(rows_ * cols_, 0.0) {}

ScoreMatrix ScoreMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  ScoreMatrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols) throw ShapeError("ragged score rows");
    std::copy(rows[i].begin(), rows[i].end(), m.values.begin() + i * m.cols);
  }
  return m;
}

PRF prf_macro(const LabelMatrix& truth, const LabelMatrix& pred) {
  check_same_shape(truth.rows, truth.cols, pred.rows, pred.cols);
  if (truth.cols == 0) throw ShapeError("no tags to average over");
  PRF sum;
  for (std::size_t j = 0; j < truth.cols; ++j) {
    const Counts c = tag_counts(truth, pred, j);
    const PRF t = prf_from_counts(double(c.tp), double(c.fp), double(c.fn));
    sum.precision += t.precision;
    sum.recall += t.recall;
    sum.f1 += t.f1;
  }
  const double L = static_cast<double>(truth.cols);
  return {sum.precision / L, sum.recall / L, sum.f1 / L};
}

PRF prf_micro(const LabelMatrix& truth, const LabelMatrix& pred) {
  check_same_shape(truth.rows, truth.cols, pred.rows, pred.cols);
  Counts total;
  for (std::size_t j = 0; j < truth.cols; ++j) {
    const Counts c = tag_counts(truth, pred, j);
    total.tp += c.tp;
    total.fp += c.fp;
    total.fn += c.fn;
  }
  return prf_from_counts(double(total.tp), double(total.fp), double(total.fn));
}

double hamming_loss(const LabelMatrix& truth, const LabelMatrix& pred) {
  check_same_shape(truth.rows, truth.cols, pred.rows, pred.cols);
  if (truth.values.empty()) throw ShapeError("empty label matrix");
  std::size_t diff = 0;
  for (std::size_t i = 0; i < truth.values.size(); ++i) diff += truth.values[i] != pred.values[i];
  return static_cast<double>(diff) / static_cast<double>(truth.values.size());
}

std::optional<double> tag_auc(const LabelMatrix& truth, const ScoreMatrix& scores,
                              std::size_t tag) {
  const auto order = ranking(scores, tag);
  // Ascending average ranks (1-based) over tie groups, summed for positives.
  const std::size_t n = order.size();
  double pos_rank_sum = 0.0;
  std::size_t positives = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores.at(order[j], tag) == scores.at(order[i], tag)) ++j;
    // Descending positions i..j-1 correspond to ascending ranks n-j+1..n-i.
    const double avg_rank = (double(n - j + 1) + double(n - i)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (truth.at(order[k], tag)) {
        pos_rank_sum += avg_rank;
        ++positives;
      }
    }
    i = j;
  }
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) return std::nullopt;
  const double np = double(positives), nn = double(negatives);
  return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

double auc_macro(const LabelMatrix& truth, const ScoreMatrix& scores) {
  check_same_shape(truth.rows, truth.cols, scores.rows, scores.cols);
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t j = 0; j < truth.cols; ++j) {
    if (auto a = tag_auc(truth, scores, j)) {
      sum += *a;
      ++used;
    }
  }
  if (used == 0) throw ShapeError("AUC undefined: every tag lacks positives or negatives");
  return sum / double(used);
}

std::optional<double> tag_average_precision(const LabelMatrix& truth,
                                            const ScoreMatrix& scores, std::size_t tag) {
  std::size_t positives = 0;
  for (std::size_t i = 0; i < truth.rows; ++i) positives += truth.at(i, tag);
  if (positives == 0) return std::nullopt;
  const auto order = ranking(scores, tag);
  double ap = 0.0;
  std::size_t tp = 0, seen = 0, i = 0;
  while (i < order.size()) {
    std::size_t j = i, group_pos = 0;
    while (j < order.size() && scores.at(order[j], tag) == scores.at(order[i], tag)) {
      group_pos += truth.at(order[j], tag);
      ++j;
    }
    tp += group_pos;
    seen += j - i;
    ap += (double(tp) / double(seen)) * (double(group_pos) / double(positives));
    i = j;
  }
  return ap;
}

double average_precision(const LabelMatrix& truth, const ScoreMatrix& scores) {
  check_same_shape(truth.rows, truth.cols, scores.rows, scores.cols);
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t j = 0; j < truth.cols; ++j) {
    if (auto a = tag_average_precision(truth, scores, j)) {
      sum += *a;
      ++used;
    }
  }
  if (used == 0) throw ShapeError("average precision undefined: no tag has a positive");
  return sum / double(used);
}

double one_error(const LabelMatrix& truth, const ScoreMatrix& scores) {
  check_same_shape(truth.rows, truth.cols, scores.rows, scores.cols);
  if (truth.rows == 0 || truth.cols == 0) throw ShapeError("empty score matrix");
  std::size_t errors = 0;
  for (std::size_t i = 0; i < truth.rows; ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < truth.cols; ++j) {
      if (scores.at(i, j) > scores.at(i, best)) best = j;
    }
    errors += truth.at(i, best) == 0;
  }
  return double(errors) / double(truth.rows);
}

MetricSuite evaluate_all(const LabelMatrix& truth, const LabelMatrix& pred,
                         const ScoreMatrix& scores) {
  MetricSuite m;
  m.macro = prf_macro(truth, pred);
  m.micro = prf_micro(truth, pred);
  m.hamming_loss = hamming_loss(truth, pred);
  m.auc = auc_macro(truth, scores);
  m.average_precision = average_precision(truth, scores);
  m.one_error = one_error(truth, scores);
  return m;
}

std::vector<std::pair<std::string, double>> metric_fields(const MetricSuite& m) {
  return {{"macro_precision", m.macro.precision},
          {"macro_recall", m.macro.recall},
          {"macro_f1", m.macro.f1},
          {"micro_precision", m.micro.precision},
          {"micro_recall", m.micro.recall},
          {"micro_f1", m.micro.f1},
          {"hamming_loss", m.hamming_loss},
          {"auc", m.auc},
          {"average_precision", m.average_precision},
          {"one_error", m.one_error}};
}

MetricSuite metric_suite_from_fields(const std::vector<std::pair<std::string, double>>& fields) {
  MetricSuite m;
  for (const auto& [name, v] : fields) {
    if (name == "macro_precision") m.macro.precision = v;
    else if (name == "macro_recall") m.macro.recall = v;
    else if (name == "macro_f1") m.macro.f1 = v;
    else if (name == "micro_precision") m.micro.precision = v;
    else if (name == "micro_recall") m.micro.recall = v;
    else if (name == "micro_f1") m.micro.f1 = v;
    else if (name == "hamming_loss") m.hamming_loss = v;
    else if (name == "auc") m.auc = v;
    else if (name == "average_precision") m.average_precision = v;
    else if (name == "one_error") m.one_error = v;
    else throw ParseError("unknown metric '" + name + "'");
  }
  return m;
}

std::string metrics_report_json(const LabelMatrix& truth, const LabelMatrix& pred,
                                const ScoreMatrix& scores) {
  const MetricSuite m = evaluate_all(truth, pred, scores);
  nlohmann::ordered_json doc;
  doc["items"] = truth.rows;
  auto& tags = doc["per_tag"] = nlohmann::ordered_json::array();
  for (std::size_t j = 0; j < truth.cols; ++j) {
    const Counts c = tag_counts(truth, pred, j);
    const PRF t = prf_from_counts(double(c.tp), double(c.fp), double(c.fn));
    nlohmann::ordered_json row;
    row["tag"] = j < truth.tag_names.size() ? truth.tag_names[j] : "tag" + std::to_string(j);
    row["support"] = c.tp + c.fn;
    row["precision"] = t.precision;
    row["recall"] = t.recall;
    row["f1"] = t.f1;
    const auto auc = tag_auc(truth, scores, j);
    const auto ap = tag_average_precision(truth, scores, j);
    row["auc"] = auc ? nlohmann::ordered_json(*auc) : nullptr;
    row["average_precision"] = ap ? nlohmann::ordered_json(*ap) : nullptr;
    tags.push_back(std::move(row));
  }
  auto& agg = doc["aggregate"];
  for (const auto& [name, v] : metric_fields(m)) agg[name] = v;
  return doc.dump(2) + "\n";
}

std::string prf_table_csv(const MetricSuite& m) {
  std::ostringstream out;
  out.precision(6);
  out << std::fixed;
  out << "Description,P,R,F\n";
  out << "Macro average," << m.macro.precision << ',' << m.macro.recall << ',' << m.macro.f1 << '\n';
  out << "Micro average," << m.micro.precision << ',' << m.micro.recall << ',' << m.micro.f1 << '\n';
  return out.str();
}

std::string ranking_table_csv(const MetricSuite& m) {
  std::ostringstream out;
  out.precision(6);
  out << std::fixed;
  out << "Hamloss,AUC,AP,One-error\n";
  out << m.hamming_loss << ',' << m.auc << ',' << m.average_precision << ',' << m.one_error << '\n';
  return out.str();
}

}  // namespace specmer
