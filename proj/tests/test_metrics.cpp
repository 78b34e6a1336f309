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

#include <cmath>

#include "doctest.h"
#include "json.hpp"
#include "oracles/oracles.hpp"
#include "specmer/errors.hpp"
#include "specmer/metrics.hpp"
#include "specmer/rng.hpp"

namespace {

using namespace specmer;

LabelMatrix labels(const std::vector<std::vector<std::uint8_t>>& rows) {
  return LabelMatrix::from_rows(rows);
}

LabelMatrix column(std::vector<std::uint8_t> v) {
  std::vector<std::vector<std::uint8_t>> rows;
  for (auto x : v) rows.push_back({x});
  return LabelMatrix::from_rows(rows);
}

ScoreMatrix score_column(std::vector<double> v) {
  std::vector<std::vector<double>> rows;
  for (auto x : v) rows.push_back({x});
  return ScoreMatrix::from_rows(rows);
}

LabelMatrix complement(const LabelMatrix& m) {
  LabelMatrix c = m;
  for (auto& v : c.values) v = 1 - v;
  return c;
}

}  // namespace

TEST_CASE("prf_macro examples") {
  const auto t = labels({{1, 0}, {1, 1}});
  const auto p = labels({{1, 1}, {0, 1}});
  const PRF m = prf_macro(t, p);
  CHECK(m.precision == 0.75);
  CHECK(m.recall == 0.75);
  CHECK(m.f1 == 2.0 / 3.0);
  const PRF same = prf_macro(t, t);
  CHECK((same.precision == 1.0 && same.recall == 1.0 && same.f1 == 1.0));
  const PRF none = prf_macro(t, complement(t));
  CHECK((none.precision == 0.0 && none.recall == 0.0 && none.f1 == 0.0));
  CHECK_THROWS_AS(prf_macro(t, labels({{1, 0}})), ShapeError);
}

TEST_CASE("prf_micro examples") {
  const auto t = labels({{1, 0}, {1, 1}});
  const auto p = labels({{1, 1}, {0, 1}});
  // Pooled over both tags: TP = 2, FP = 1, FN = 1.
  const PRF m = prf_micro(t, p);
  CHECK(m.precision == 2.0 / 3.0);
  CHECK(m.recall == 2.0 / 3.0);
  CHECK(m.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  const PRF same = prf_micro(t, t);
  CHECK(same.f1 == 1.0);
  const auto t1 = column({1, 0, 1, 1}), p1 = column({1, 1, 0, 1});
  const PRF a = prf_micro(t1, p1), b = prf_macro(t1, p1);
  CHECK((a.precision == b.precision && a.recall == b.recall && a.f1 == b.f1));
}

TEST_CASE("hamming_loss examples") {
  const auto t = labels({{1, 0}, {0, 1}});
  CHECK(hamming_loss(t, t) == 0.0);
  CHECK(hamming_loss(t, complement(t)) == 1.0);
  CHECK(hamming_loss(t, labels({{1, 1}, {0, 1}})) == 0.25);
}

TEST_CASE("auc examples") {
  const auto t = labels({{1, 0}, {0, 1}, {1, 1}, {0, 0}});
  ScoreMatrix perfect(4, 2);
  for (std::size_t i = 0; i < t.values.size(); ++i) perfect.values[i] = t.values[i];
  CHECK(auc_macro(t, perfect) == 1.0);
  ScoreMatrix constant(4, 2);
  std::fill(constant.values.begin(), constant.values.end(), 0.3);
  CHECK(auc_macro(t, constant) == 0.5);
  CHECK(auc_macro(column({1, 0, 1, 0}), score_column({0.9, 0.8, 0.4, 0.1})) == 0.75);
  // Tag 1 has no negatives and is skipped.
  const auto skip = labels({{1, 1}, {0, 1}});
  CHECK(auc_macro(skip, ScoreMatrix::from_rows({{0.9, 0.1}, {0.2, 0.3}})) == 1.0);
  CHECK_THROWS(auc_macro(labels({{1, 1}, {1, 1}}), ScoreMatrix(2, 2)));
}

TEST_CASE("average precision examples") {
  CHECK(average_precision(column({1, 0, 1}), score_column({0.9, 0.5, 0.7})) == 1.0);
  CHECK(average_precision(column({0, 1}), score_column({0.9, 0.1})) == 0.5);
  CHECK(average_precision(column({1, 0, 1}), score_column({0.9, 0.5, 0.1})) ==
        doctest::Approx(5.0 / 6.0).epsilon(1e-15));
  // Tied scores count as one threshold: both items enter together.
  CHECK(average_precision(column({1, 0}), score_column({0.5, 0.5})) == 0.5);
}

TEST_CASE("one_error examples") {
  const auto t = labels({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  CHECK(one_error(t, ScoreMatrix::from_rows({{0.9, 0.1, 0}, {0, 0.8, 0.1}, {0, 0.1, 0.5}})) == 0.0);
  CHECK(one_error(t, ScoreMatrix::from_rows({{0.1, 0.9, 0}, {0.8, 0, 0.1}, {0.6, 0.1, 0.5}})) == 1.0);
  CHECK(one_error(t, ScoreMatrix::from_rows({{0.9, 0.1, 0}, {0, 0.8, 0.1}, {0.6, 0.1, 0.5}})) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  // Ties go to the lowest index.
  CHECK(one_error(labels({{0, 1}}), ScoreMatrix::from_rows({{0.5, 0.5}})) == 1.0);
  CHECK(one_error(labels({{1, 0}}), ScoreMatrix::from_rows({{0.5, 0.5}})) == 0.0);
}

TEST_CASE("randomized agreement with the brute-force oracle") {
  Rng rng(2024);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t N = 1 + rng.below(6), L = 1 + rng.below(4);
    oracle::Rows t(N, std::vector<int>(L)), p(N, std::vector<int>(L));
    oracle::ScoreRows s(N, std::vector<double>(L));
    LabelMatrix T(N, L), P(N, L);
    ScoreMatrix S(N, L);
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < L; ++j) {
        t[i][j] = T.at(i, j) = rng.bernoulli(0.5);
        p[i][j] = P.at(i, j) = rng.bernoulli(0.5);
        s[i][j] = S.at(i, j) = double(rng.below(5)) / 4.0;  // coarse grid forces ties
      }
    const auto ma = prf_macro(T, P);
    const auto mo = oracle::macro(t, p);
    CHECK(std::abs(ma.precision - mo.p) <= 1e-12);
    CHECK(std::abs(ma.recall - mo.r) <= 1e-12);
    CHECK(std::abs(ma.f1 - mo.f) <= 1e-12);
    const auto mi = prf_micro(T, P);
    const auto mio = oracle::micro(t, p);
    CHECK(std::abs(mi.precision - mio.p) <= 1e-12);
    CHECK(std::abs(mi.recall - mio.r) <= 1e-12);
    CHECK(std::abs(mi.f1 - mio.f) <= 1e-12);
    CHECK(std::abs(hamming_loss(T, P) - oracle::hamming(t, p)) <= 1e-12);
    CHECK(std::abs(one_error(T, S) - oracle::one_error(t, s)) <= 1e-12);
    const auto auc = oracle::macro_over_tags(L, [&](std::size_t j) { return oracle::tag_auc(t, s, j); });
    if (auc) {
      CHECK(std::abs(auc_macro(T, S) - *auc) <= 1e-12);
    } else {
      CHECK_THROWS(auc_macro(T, S));
    }
    const auto ap = oracle::macro_over_tags(L, [&](std::size_t j) { return oracle::tag_ap(t, s, j); });
    if (ap) {
      CHECK(std::abs(average_precision(T, S) - *ap) <= 1e-12);
    } else {
      CHECK_THROWS(average_precision(T, S));
    }
  }
}

TEST_CASE("metric ranges, permutation invariance and monotone invariance") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t N = 2 + rng.below(8), L = 2 + rng.below(5);
    LabelMatrix T(N, L), P(N, L);
    ScoreMatrix S(N, L);
    for (std::size_t i = 0; i < N; ++i) {
      for (std::size_t j = 0; j < L; ++j) {
        T.at(i, j) = rng.bernoulli(0.4);
        P.at(i, j) = rng.bernoulli(0.4);
        S.at(i, j) = rng.uniform(-3, 3);
      }
      T.at(i, rng.below(L)) = 1;
    }
    bool auc_defined = false;
    for (std::size_t j = 0; j < L; ++j) auc_defined |= tag_auc(T, S, j).has_value();
    if (!auc_defined) continue;
    const MetricSuite m = evaluate_all(T, P, S);
    for (const auto& [name, v] : metric_fields(m)) {
      CHECK_MESSAGE((v >= 0.0 && v <= 1.0), name);
    }
    // Permute tag columns together.
    std::vector<std::size_t> perm(L);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(std::span<std::size_t>(perm));
    LabelMatrix T2(N, L), P2(N, L);
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < L; ++j) {
        T2.at(i, j) = T.at(i, perm[j]);
        P2.at(i, j) = P.at(i, perm[j]);
      }
    CHECK(std::abs(prf_micro(T2, P2).f1 - m.micro.f1) <= 1e-12);
    CHECK(std::abs(prf_macro(T2, P2).f1 - m.macro.f1) <= 1e-12);
    // Strictly monotone transform of scores.
    ScoreMatrix S2 = S;
    for (double& v : S2.values) v = std::exp(2 * v) + 5;
    CHECK(std::abs(auc_macro(T, S2) - m.auc) <= 1e-12);
  }
}

TEST_CASE("field view and table exports") {
  MetricSuite m;
  m.macro = {0.5, 0.25, 0.125};
  m.micro = {0.75, 0.5, 0.625};
  m.hamming_loss = 0.1;
  m.auc = 0.9;
  m.average_precision = 0.8;
  m.one_error = 0.05;
  const auto fields = metric_fields(m);
  REQUIRE(fields.size() == 10);
  CHECK(fields[0].first == "macro_precision");
  CHECK(fields[9].first == "one_error");
  const auto back = metric_suite_from_fields(fields);
  CHECK(metric_fields(back) == fields);
  const auto prf = prf_table_csv(m);
  CHECK(prf.rfind("Description,P,R,F\n", 0) == 0);
  CHECK(prf.find("0.125") != std::string::npos);
  CHECK(ranking_table_csv(m).rfind("Hamloss,AUC,AP,One-error\n", 0) == 0);
}

TEST_CASE("metrics report JSON") {
  auto t = labels({{1, 0}, {0, 1}, {1, 1}});
  t.tag_names = {"calm", "happy"};
  const auto p = labels({{1, 0}, {1, 1}, {1, 0}});
  const auto s = ScoreMatrix::from_rows({{0.9, 0.2}, {0.6, 0.7}, {0.8, 0.4}});
  const auto j = nlohmann::json::parse(metrics_report_json(t, p, s));
  REQUIRE(j.at("per_tag").size() == 2);
  CHECK(j["per_tag"][0]["tag"] == "calm");
  CHECK(j["aggregate"]["macro_f1"].get<double>() == doctest::Approx(prf_macro(t, p).f1));
  CHECK(j["aggregate"]["one_error"].get<double>() == 0.0);
}
