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

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "comet/hetgraph.hpp"
#include "comet/model.hpp"

namespace comet {

/// Parallel score/label lists; labels are 0 or 1.
struct ScoredPairs {
  std::vector<double> scores;
  std::vector<int> labels;

  void push(double score, int label) {
    scores.push_back(score);
    labels.push_back(label);
  }
  std::size_t size() const noexcept { return scores.size(); }
};

struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  bool operator==(const ConfusionCounts&) const = default;
};

struct EvalReport {
  double auc = 0.0;
  double aupr = 0.0;
  double threshold = 0.0;
  double youden_j = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  ConfusionCounts counts;
  bool operator==(const EvalReport&) const = default;
};

struct YoudenResult {
  double threshold = 0.0;
  double j = 0.0;
};

/// P(score_pos > score_neg) + P(tie) / 2 via midranks.
double auc_roc(const ScoredPairs& pairs);
/// Step-wise area: sum over descending distinct thresholds of
/// (recall gain) x (precision at that threshold).
double auc_pr(const ScoredPairs& pairs);
/// Candidates are -inf, midpoints between adjacent distinct scores and
/// +inf; the smallest maximizer of TPR - FPR wins.
YoudenResult youden_threshold(const ScoredPairs& pairs);
/// Predicts positive when score >= threshold.
EvalReport classification_report(const ScoredPairs& pairs, double threshold);
/// All metrics, with the threshold chosen by Youden's index on `pairs`.
EvalReport full_report(const ScoredPairs& pairs);

/// Scores the positives plus an equal number of seeded negatives drawn
/// outside `observed`. `graph` is the message-passing graph.
EvalReport evaluate(const CometModel& model, const HeteroGraph& graph, const ForwardPlan& plan,
                    std::span<const DiseaseGenePair> positives,
                    std::span<const DiseaseGenePair> observed, std::uint64_t seed);

/// Labels and sigmoid scores for explicit positive and negative pairs.
ScoredPairs score_pairs(const NodeEmbeddings& emb, std::span<const DiseaseGenePair> positives,
                        std::span<const DiseaseGenePair> negatives);

/// Fixed-column text rendering and one JSON object per report.
std::string format_report_header();
std::string format_report_row(const std::string& label, const EvalReport& r);
std::string report_json(const EvalReport& r);

}  // namespace comet
