// Copyright 2026 The COMET Authors
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

#include <gtest/gtest.h>

#include <json.hpp>
#include <random>

#include "comet/error.hpp"
#include "comet/metrics.hpp"
#include "support/oracles.hpp"

namespace comet {
namespace {

ScoredPairs make(std::initializer_list<std::pair<double, int>> items) {
  ScoredPairs p;
  for (auto [s, l] : items) p.push(s, l);
  return p;
}

// Coarse scores force many ties.
ScoredPairs random_pairs(std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> size(2, 400);
  std::uniform_int_distribution<int> coarse(0, 20);
  std::normal_distribution<double> fine(0.0, 1.0);
  std::bernoulli_distribution label(0.3), use_coarse(0.5);
  const bool ties = use_coarse(rng);
  ScoredPairs p;
  const std::size_t n = size(rng);
  for (std::size_t i = 0; i < n; ++i) {
    const int l = i == 0 ? 1 : i == 1 ? 0 : label(rng) ? 1 : 0;
    const double s = ties ? coarse(rng) / 20.0 : fine(rng) + 0.8 * l;
    p.push(s, l);
  }
  return p;
}

TEST(Metrics, HandCaseAuc) {
  EXPECT_EQ(auc_roc(make({{0.8, 1}, {0.4, 1}, {0.6, 0}, {0.2, 0}})), 0.75);
  EXPECT_EQ(auc_roc(make({{0.5, 1}, {0.5, 0}})), 0.5);
  EXPECT_EQ(auc_roc(make({{0.1, 1}, {0.9, 0}})), 0.0);
}

TEST(Metrics, HandCaseAupr) {
  // Ranked: neg, neg, neg, pos -> precision 1/4 at full recall.
  EXPECT_EQ(auc_pr(make({{0.9, 0}, {0.8, 0}, {0.7, 0}, {0.1, 1}})), 0.25);
  EXPECT_EQ(auc_pr(make({{0.9, 1}, {0.8, 1}, {0.1, 0}})), 1.0);
  // A tie group contributes its pooled precision once.
  EXPECT_DOUBLE_EQ(auc_pr(make({{0.5, 1}, {0.5, 0}, {0.1, 1}})), 0.5 * 0.5 + 0.5 * (2.0 / 3.0));
}

TEST(Metrics, YoudenHandCase) {
  const auto y = youden_threshold(make({{0.9, 1}, {0.7, 1}, {0.4, 0}, {0.2, 0}}));
  EXPECT_DOUBLE_EQ(y.threshold, 0.55);
  EXPECT_EQ(y.j, 1.0);
  // All scores equal: every candidate gives J = 0 and -inf is the smallest.
  const auto flat = youden_threshold(make({{0.5, 1}, {0.5, 0}}));
  EXPECT_EQ(flat.threshold, -std::numeric_limits<double>::infinity());
}

TEST(Metrics, MatchesQuadraticSweeps) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const auto p = random_pairs(seed);
    EXPECT_NEAR(auc_roc(p), testing::pairwise_auc(p), 1e-9) << "seed " << seed;
    EXPECT_NEAR(auc_pr(p), testing::sweep_aupr(p), 1e-9) << "seed " << seed;
    const auto [t, j] = testing::sweep_youden(p);
    const auto y = youden_threshold(p);
    EXPECT_NEAR(y.j, j, 1e-9) << "seed " << seed;
    EXPECT_EQ(y.threshold, t) << "seed " << seed;
  }
}

TEST(Metrics, AucInvariantUnderMonotoneTransform) {
  const auto p = random_pairs(3);
  auto q = p;
  for (auto& s : q.scores) s = std::exp(3.0 * s) + 7.0;
  EXPECT_DOUBLE_EQ(auc_roc(p), auc_roc(q));
  EXPECT_DOUBLE_EQ(auc_pr(p), auc_pr(q));
}

TEST(Metrics, AucComplementUnderLabelFlip) {
  const auto p = random_pairs(4);
  auto q = p;
  for (auto& l : q.labels) l = 1 - l;
  EXPECT_NEAR(auc_roc(p) + auc_roc(q), 1.0, 1e-12);
}

TEST(Metrics, ClassificationReportCounts) {
  const auto p = make({{0.9, 1}, {0.6, 0}, {0.6, 1}, {0.1, 0}, {0.3, 1}});
  const auto r = classification_report(p, 0.6);
  EXPECT_EQ(r.counts, (ConfusionCounts{2, 1, 1, 1}));
  EXPECT_DOUBLE_EQ(r.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.recall, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.f1, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.accuracy, 3.0 / 5.0);
  const auto none = classification_report(p, 5.0);
  EXPECT_EQ(none.precision, 0.0);
  EXPECT_EQ(none.f1, 0.0);
}

TEST(Metrics, FullReportUsesYouden) {
  const auto p = random_pairs(9);
  const auto r = full_report(p);
  EXPECT_EQ(r.threshold, youden_threshold(p).threshold);
  EXPECT_EQ(r.auc, auc_roc(p));
  EXPECT_EQ(r.counts, testing::counts_at(p, r.threshold));
}

TEST(Metrics, SingleClassIsDegenerate) {
  const auto p = make({{0.1, 1}, {0.2, 1}});
  for (auto f : {+[](const ScoredPairs& x) { auc_roc(x); }, +[](const ScoredPairs& x) { youden_threshold(x); }}) {
    try {
      f(p);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::DegenerateLabels);
    }
  }
  EXPECT_THROW(auc_pr(make({{0.1, 0}, {0.2, 0}})), Error);
}

TEST(Metrics, ReportJsonIsValid) {
  const auto r = full_report(make({{0.9, 1}, {0.1, 0}}));
  const auto j = nlohmann::json::parse(report_json(r));
  EXPECT_EQ(j["auc"].get<double>(), 1.0);
  EXPECT_EQ(j["tp"].get<int>(), 1);
  EXPECT_EQ(format_report_row("x", r).size(), format_report_header().size());
}

}  // namespace
}  // namespace comet
