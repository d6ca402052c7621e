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

#include <fstream>
#include <map>
#include <set>

#include "comet/error.hpp"
#include "comet/trainer.hpp"
#include "support/graphs.hpp"

namespace comet {
namespace {

using testing::TempDir;

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected comet::Error";
  return ErrorCode::DegenerateConfig;
}

HeteroGraph dense_gd_graph(std::uint64_t seed) {
  return testing::random_graph({.genes = 30, .diseases = 10, .go = 5, .pheno = 5, .density = 0.35}, seed);
}

ModelConfig tiny_model() {
  ModelConfig c;
  c.hidden_dim = 8;
  c.heads = 2;
  c.ffn_dim = 8;
  c.instance_cap = 4;
  return c;
}

TrainConfig quick_train() {
  TrainConfig t;
  t.epochs = 2;
  t.batch_size = 16;
  t.learning_rate = 1e-2;
  return t;
}

TEST(TrainConfig, ValidateAndRoundTrip) {
  TrainConfig t;
  t.split_ratios = {0.7, 0.2, 0.1};
  t.supervision_fraction = 0.25;
  EXPECT_EQ(TrainConfig::from_kv(t.to_kv()), t);
  auto bad = [](auto mutate) {
    TrainConfig c;
    mutate(c);
    return code_of([&] { c.validate(); });
  };
  EXPECT_EQ(bad([](TrainConfig& c) { c.epochs = 0; }), ErrorCode::InvalidConfig);
  EXPECT_EQ(bad([](TrainConfig& c) { c.split_ratios = {0.5, 0.3, 0.3}; }), ErrorCode::InvalidConfig);
  EXPECT_EQ(bad([](TrainConfig& c) { c.negatives_per_positive = 0; }), ErrorCode::InvalidConfig);
  EXPECT_EQ(bad([](TrainConfig& c) { c.supervision_fraction = 1.5; }), ErrorCode::InvalidConfig);
}

TEST(Split, ProportionsAndDisjointCover) {
  const auto g = dense_gd_graph(1);
  const auto all = gene_disease_pairs(g);
  ASSERT_GE(all.size(), 50u);
  const auto s = split_edges(g, {0.8, 0.1, 0.1}, 7);
  const auto n = all.size();
  EXPECT_EQ(s.validation.size(), n / 10);
  EXPECT_EQ(s.test.size(), n / 10);
  EXPECT_EQ(s.train.size(), n - 2 * (n / 10));
  std::vector<DiseaseGenePair> merged;
  for (auto* part : {&s.train, &s.validation, &s.test}) {
    EXPECT_TRUE(std::is_sorted(part->begin(), part->end()));
    merged.insert(merged.end(), part->begin(), part->end());
  }
  std::sort(merged.begin(), merged.end());
  EXPECT_EQ(merged, all);
}

TEST(Split, ExactEightOneOne) {
  HeteroGraph g;
  for (int i = 0; i < 10; ++i) g.add_node(NodeType::Gene, "g" + std::to_string(i));
  g.add_node(NodeType::Disease, "d");
  for (std::uint32_t i = 0; i < 10; ++i) g.add_edge({NodeType::Gene, i}, {NodeType::Disease, 0}, RelationType::GeneDisease);
  g.freeze();
  const auto s = split_edges(g, {0.8, 0.1, 0.1}, 3);
  EXPECT_EQ(s.train.size(), 8u);
  EXPECT_EQ(s.validation.size(), 1u);
  EXPECT_EQ(s.test.size(), 1u);
  EXPECT_EQ(code_of([&] { split_edges(g, {0.98, 0.01, 0.01}, 3); }), ErrorCode::SplitError);
}

TEST(Split, SeededAndSeedSensitive) {
  const auto g = dense_gd_graph(2);
  EXPECT_EQ(split_edges(g, {0.8, 0.1, 0.1}, 5).test, split_edges(g, {0.8, 0.1, 0.1}, 5).test);
  EXPECT_NE(split_edges(g, {0.8, 0.1, 0.1}, 5).test, split_edges(g, {0.8, 0.1, 0.1}, 6).test);
}

TEST(Split, TrainingGraphHasNoHeldOutEdges) {
  const auto g = dense_gd_graph(3);
  const auto s = split_edges(g, {0.8, 0.1, 0.1}, 1);
  const auto tg = training_graph(g, s);
  for (auto* part : {&s.validation, &s.test})
    for (auto p : *part) {
      EXPECT_FALSE(tg.has_edge({NodeType::Gene, p.gene}, {NodeType::Disease, p.disease}, RelationType::GeneDisease));
      EXPECT_FALSE(tg.has_edge({NodeType::Disease, p.disease}, {NodeType::Gene, p.gene}, RelationType::DiseaseGene));
    }
  EXPECT_EQ(gene_disease_pairs(tg), s.train);
}

TEST(Negatives, NeverObservedAndSeeded) {
  const auto g = dense_gd_graph(4);
  const auto known = gene_disease_pairs(g);
  const PairSet observed(known);
  const auto neg = sample_negatives(10, 30, observed, 500, 9);
  EXPECT_EQ(neg.size(), 500u);
  for (auto p : neg) {
    EXPECT_FALSE(observed.contains(p));
    EXPECT_LT(p.disease, 10u);
    EXPECT_LT(p.gene, 30u);
  }
  EXPECT_EQ(neg, sample_negatives(10, 30, observed, 500, 9));
}

// Every unobserved pair is equally likely: per-pair counts over many draws
// follow Binomial(draws, 1/free); a 6 sigma band is loose enough to be stable.
TEST(Negatives, UniformOverFreePairs) {
  std::vector<DiseaseGenePair> known{{0, 0}, {0, 1}, {1, 2}};
  const PairSet observed(known);
  const std::size_t draws = 24000;
  const auto neg = sample_negatives(3, 4, observed, draws, 5);
  std::map<DiseaseGenePair, std::size_t> hits;
  for (auto p : neg) ++hits[p];
  EXPECT_EQ(hits.size(), 9u);
  const double p = 1.0 / 9.0, mean = p * draws, sd = std::sqrt(draws * p * (1 - p));
  for (auto& [pair, n] : hits) EXPECT_NEAR(static_cast<double>(n), mean, 6 * sd);
}

TEST(Negatives, ExhaustedSpace) {
  std::vector<DiseaseGenePair> all{{0, 0}, {0, 1}};
  const PairSet observed(all);
  EXPECT_EQ(code_of([&] { sample_negatives(1, 2, observed, 1, 1); }), ErrorCode::ExhaustedSpace);
}

// Scalar Adam written out independently for one coordinate.
TEST(Adam, MatchesScalarReference) {
  ad::ParameterStore ps;
  ps.add("w", {2}, {0.5, -1.5});
  Adam opt(0.01, 0.9, 0.999, 1e-8);
  double w[2] = {0.5, -1.5}, m[2] = {0, 0}, v[2] = {0, 0};
  for (int t = 1; t <= 50; ++t) {
    auto grad = ps.get("w").mutable_grad();
    for (int i = 0; i < 2; ++i) grad[i] = std::sin(t * (i + 1.0)) * w[i] + 0.1;
    double g[2] = {grad[0], grad[1]};
    opt.step(ps);
    for (int i = 0; i < 2; ++i) {
      m[i] = 0.9 * m[i] + 0.1 * g[i];
      v[i] = 0.999 * v[i] + 0.001 * g[i] * g[i];
      const double mh = m[i] / (1 - std::pow(0.9, t)), vh = v[i] / (1 - std::pow(0.999, t));
      w[i] -= 0.01 * mh / (std::sqrt(vh) + 1e-8);
      EXPECT_NEAR(ps.get("w").data()[i], w[i], 1e-12);
    }
  }
  EXPECT_EQ(opt.steps(), 50u);
}

TEST(EarlyStopper, StopsAfterPatience) {
  EarlyStopper s(2);
  EXPECT_TRUE(s.update(0.5));
  EXPECT_FALSE(s.update(0.4));
  EXPECT_FALSE(s.should_stop());
  EXPECT_TRUE(s.update(0.6));
  EXPECT_FALSE(s.update(0.6));
  EXPECT_FALSE(s.update(0.1));
  EXPECT_TRUE(s.should_stop());
  EXPECT_EQ(s.best(), 0.6);
}

TEST(EarlyStopper, PatienceOneStopsAfterTwoWorseningEpochs) {
  EarlyStopper s(1);
  std::size_t epochs = 0;
  for (double auc : {0.9, 0.8, 0.7, 0.6}) {
    ++epochs;
    s.update(auc);
    if (s.should_stop()) break;
  }
  EXPECT_EQ(epochs, 2u);
}

TEST(StepSize, FractionAndCap) {
  TrainConfig t;
  t.batch_size = 10;
  t.supervision_fraction = 0.3;
  EXPECT_EQ(step_size(t, 100), 10u);
  EXPECT_EQ(step_size(t, 20), 6u);
  t.supervision_fraction = 0.0;
  EXPECT_EQ(step_size(t, 20), 10u);
}

TEST(Training, PrepareExcludesEveryKnownPositive) {
  const auto g = dense_gd_graph(5);
  const std::vector<DiseaseGenePair> extra{{9, 29}};
  const auto data = prepare_training(g, tiny_model(), quick_train(), extra);
  EXPECT_TRUE(data.observed.contains({9, 29}));
  for (auto p : gene_disease_pairs(g)) EXPECT_TRUE(data.observed.contains(p));
  EXPECT_EQ(data.validation_negatives.size(), data.split.validation.size());
  for (auto p : data.validation_negatives) EXPECT_FALSE(data.observed.contains(p));
}

TEST(Training, ZeroLearningRateLeavesParametersBitIdentical) {
  const auto g = dense_gd_graph(6);
  CometModel model(tiny_model(), g);
  const auto before = model.params().clone();
  auto t = quick_train();
  t.learning_rate = 0.0;
  const auto data = prepare_training(g, model.config(), t);
  Adam opt(t);
  const auto rep = train_epoch(model, opt, data, t, 1);
  EXPECT_GT(rep.batches, 0u);
  EXPECT_TRUE(model.params().bitwise_equal(before));
}

TEST(Training, FitIsDeterministicAndRestoresBest) {
  const auto g = dense_gd_graph(7);
  auto t = quick_train();
  t.epochs = 3;
  auto run = [&] {
    CometModel model(tiny_model(), g);
    const auto data = prepare_training(g, model.config(), t);
    auto r = fit(model, data, t);
    EXPECT_TRUE(model.params().bitwise_equal(r.best.params));
    return r;
  };
  const auto a = run(), b = run();
  ASSERT_EQ(a.history.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(a.history[i].mean_loss, b.history[i].mean_loss);
    EXPECT_EQ(a.history[i].validation_auc, b.history[i].validation_auc);
  }
  EXPECT_TRUE(a.best.params.bitwise_equal(b.best.params));
  double best = 0.0;
  for (auto& h : a.history) best = std::max(best, h.validation_auc);
  EXPECT_EQ(a.best.validation_auc, best);
}

TEST(Checkpoint, RoundTripReproducesValidationAuc) {
  TempDir dir("ckpt");
  const auto g = dense_gd_graph(8);
  auto t = quick_train();
  CometModel model(tiny_model(), g);
  const auto data = prepare_training(g, model.config(), t);
  const auto r = fit(model, data, t);
  save_checkpoint(r.best, dir / "c.bin");
  const auto back = load_checkpoint(dir / "c.bin");
  EXPECT_EQ(back.model, r.best.model);
  EXPECT_EQ(back.epoch, r.best.epoch);
  EXPECT_TRUE(back.params.bitwise_equal(r.best.params));
  const auto restored = restore_model(back);
  EXPECT_EQ(validation_metrics(restored, data).first, back.validation_auc);
}

TEST(Checkpoint, CorruptionIsDetected) {
  TempDir dir("ckpt_bad");
  Checkpoint c;
  c.model = tiny_model();
  c.model.input_dims = {4, 4, 4, 4};
  c.params = CometModel(c.model).params().clone();
  save_checkpoint(c, dir / "ok.bin");
  std::string bytes;
  {
    std::ifstream in(dir / "ok.bin", std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  auto load_bytes = [&](const std::string& b) {
    {
      std::ofstream out(dir / "x.bin", std::ios::binary | std::ios::trunc);
      out << b;
    }
    return code_of([&] { load_checkpoint(dir / "x.bin"); });
  };
  for (std::size_t cut : {std::size_t{3}, std::size_t{20}, bytes.size() / 2, bytes.size() - 1})
    EXPECT_EQ(load_bytes(bytes.substr(0, cut)), ErrorCode::FormatError) << "cut " << cut;
  std::string magic = bytes;
  magic[3] = 'x';
  EXPECT_EQ(load_bytes(magic), ErrorCode::FormatError);
  std::string version = bytes;
  version[8] = 2;
  EXPECT_EQ(load_bytes(version), ErrorCode::IncompatibleCheckpoint);
  EXPECT_EQ(load_bytes(bytes + "junk"), ErrorCode::FormatError);
  EXPECT_EQ(code_of([&] { load_checkpoint(dir / "missing.bin"); }), ErrorCode::IoError);
}

}  // namespace
}  // namespace comet
