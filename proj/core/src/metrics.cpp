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

#include "comet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "comet/error.hpp"
#include "comet/trainer.hpp"

namespace comet {

namespace {

struct ClassCounts {
  std::size_t pos = 0, neg = 0;
};

ClassCounts count_classes(const ScoredPairs& p) {
  if (p.scores.size() != p.labels.size())
    throw Error(ErrorCode::ShapeError, "scores and labels differ in length");
  ClassCounts c;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p.labels[i] != 0 && p.labels[i] != 1) throw Error(ErrorCode::DegenerateLabels, "labels must be 0 or 1");
    (p.labels[i] ? c.pos : c.neg) += 1;
  }
  return c;
}

ClassCounts require_both(const ScoredPairs& p) {
  auto c = count_classes(p);
  if (c.pos == 0 || c.neg == 0)
    throw Error(ErrorCode::DegenerateLabels, "need at least one positive and one negative");
  return c;
}

std::vector<std::size_t> order_by_score(const ScoredPairs& p) {
  std::vector<std::size_t> idx(p.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return p.scores[a] < p.scores[b]; });
  return idx;
}

double ratio(std::size_t a, std::size_t b) { return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b); }

std::string fmt_json_number(double v) {
  if (std::isnan(v)) return "null";
  if (std::isinf(v)) return v > 0 ? "\"inf\"" : "\"-inf\"";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double auc_roc(const ScoredPairs& pairs) {
  const auto c = require_both(pairs);
  const auto idx = order_by_score(pairs);
  // Sum of midranks of the positives.
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    std::size_t pos = 0;
    while (j < idx.size() && pairs.scores[idx[j]] == pairs.scores[idx[i]]) pos += pairs.labels[idx[j++]];
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    rank_sum += midrank * static_cast<double>(pos);
    i = j;
  }
  const double p = static_cast<double>(c.pos), n = static_cast<double>(c.neg);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * n);
}

double auc_pr(const ScoredPairs& pairs) {
  const auto c = count_classes(pairs);
  if (c.pos == 0) throw Error(ErrorCode::DegenerateLabels, "AUPR needs at least one positive");
  auto idx = order_by_score(pairs);
  std::reverse(idx.begin(), idx.end());
  std::size_t tp = 0, seen = 0;
  double area = 0.0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    std::size_t pos = 0;
    while (j < idx.size() && pairs.scores[idx[j]] == pairs.scores[idx[i]]) pos += pairs.labels[idx[j++]];
    tp += pos;
    seen = j;
    area += ratio(pos, c.pos) * ratio(tp, seen);
    i = j;
  }
  return area;
}

YoudenResult youden_threshold(const ScoredPairs& pairs) {
  const auto c = require_both(pairs);
  const auto idx = order_by_score(pairs);
  std::vector<double> sorted;
  std::vector<std::size_t> pos_below{0};  // positives strictly below sorted[k]
  sorted.reserve(idx.size());
  for (auto i : idx) {
    sorted.push_back(pairs.scores[i]);
    pos_below.push_back(pos_below.back() + static_cast<std::size_t>(pairs.labels[i]));
  }
  std::vector<double> candidates{-std::numeric_limits<double>::infinity()};
  for (std::size_t k = 0; k + 1 < sorted.size(); ++k)
    if (sorted[k] != sorted[k + 1]) candidates.push_back(sorted[k] + (sorted[k + 1] - sorted[k]) / 2.0);
  candidates.push_back(std::numeric_limits<double>::infinity());

  YoudenResult best{candidates.front(), -std::numeric_limits<double>::infinity()};
  for (double t : candidates) {
    const auto below = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), t) - sorted.begin());
    const std::size_t tp = c.pos - pos_below[below];
    const std::size_t fp = (sorted.size() - below) - tp;
    const double j = ratio(tp, c.pos) - ratio(fp, c.neg);
    if (j > best.j) best = {t, j};
  }
  return best;
}

EvalReport classification_report(const ScoredPairs& pairs, double threshold) {
  count_classes(pairs);
  EvalReport r;
  r.threshold = threshold;
  auto& k = r.counts;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const bool predicted = pairs.scores[i] >= threshold;
    if (pairs.labels[i]) (predicted ? k.tp : k.fn) += 1;
    else (predicted ? k.fp : k.tn) += 1;
  }
  r.precision = ratio(k.tp, k.tp + k.fp);
  r.recall = ratio(k.tp, k.tp + k.fn);
  r.f1 = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  r.accuracy = ratio(k.tp + k.tn, pairs.size());
  return r;
}

EvalReport full_report(const ScoredPairs& pairs) {
  const auto y = youden_threshold(pairs);
  auto r = classification_report(pairs, y.threshold);
  r.youden_j = y.j;
  r.auc = auc_roc(pairs);
  r.aupr = auc_pr(pairs);
  return r;
}

ScoredPairs score_pairs(const NodeEmbeddings& emb, std::span<const DiseaseGenePair> positives,
                        std::span<const DiseaseGenePair> negatives) {
  ScoredPairs out;
  const std::size_t d = emb.genes.dim(1);
  auto add = [&](std::span<const DiseaseGenePair> list, int label) {
    for (const auto& p : list) {
      auto zd = emb.diseases.data().subspan(p.disease * d, d);
      auto zg = emb.genes.data().subspan(p.gene * d, d);
      out.push(score_pair(zd, zg), label);
    }
  };
  add(positives, 1);
  add(negatives, 0);
  return out;
}

EvalReport evaluate(const CometModel& model, const HeteroGraph& graph, const ForwardPlan& plan,
                    std::span<const DiseaseGenePair> positives,
                    std::span<const DiseaseGenePair> observed, std::uint64_t seed) {
  if (positives.empty()) throw Error(ErrorCode::DegenerateLabels, "no positive pairs to evaluate");
  const PairSet excluded(observed);
  const auto negatives = sample_negatives(graph.node_count(NodeType::Disease), graph.node_count(NodeType::Gene),
                                          excluded, positives.size(), seed);
  const auto result = model.forward(graph, plan);
  return full_report(score_pairs(result.embeddings, positives, negatives));
}

std::string format_report_header() {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-14s %9s %9s %9s %9s %9s %9s %9s", "model", "auc", "aupr", "threshold",
                "precision", "recall", "f1", "accuracy");
  return buf;
}

std::string format_report_row(const std::string& label, const EvalReport& r) {
  char buf[200];
  std::snprintf(buf, sizeof buf, "%-14s %9.4f %9.4f %9.4f %9.4f %9.4f %9.4f %9.4f", label.c_str(), r.auc, r.aupr,
                r.threshold, r.precision, r.recall, r.f1, r.accuracy);
  return buf;
}

std::string report_json(const EvalReport& r) {
  std::string s = "{";
  auto field = [&s](const char* key, const std::string& v) {
    if (s.size() > 1) s += ",";
    s += "\"";
    s += key;
    s += "\":";
    s += v;
  };
  field("auc", fmt_json_number(r.auc));
  field("aupr", fmt_json_number(r.aupr));
  field("threshold", fmt_json_number(r.threshold));
  field("youden_j", fmt_json_number(r.youden_j));
  field("precision", fmt_json_number(r.precision));
  field("recall", fmt_json_number(r.recall));
  field("f1", fmt_json_number(r.f1));
  field("accuracy", fmt_json_number(r.accuracy));
  field("tp", std::to_string(r.counts.tp));
  field("fp", std::to_string(r.counts.fp));
  field("tn", std::to_string(r.counts.tn));
  field("fn", std::to_string(r.counts.fn));
  return s + "}";
}

}  // namespace comet
