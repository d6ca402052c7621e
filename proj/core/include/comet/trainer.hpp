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

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "comet/autodiff/params.hpp"
#include "comet/hetgraph.hpp"
#include "comet/model.hpp"

namespace comet {

struct TrainConfig {
  std::size_t epochs = 20;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t negatives_per_positive = 1;
  std::size_t batch_size = 256;  // positive pairs per step
  // Fraction of the training positives supervised per step. Each step's
  // positives are hidden from message passing, so the model never sees the
  // edge it is asked to predict. 0 keeps every training edge visible.
  double supervision_fraction = 0.3;
  std::array<double, 3> split_ratios{0.8, 0.1, 0.1};  // train, validation, test
  std::size_t patience = 10;
  std::uint64_t seed = 42;

  void validate() const;
  std::string to_kv() const;
  static TrainConfig from_kv(const std::string& text);
  bool operator==(const TrainConfig&) const = default;
};

struct EdgeSplit {
  std::vector<DiseaseGenePair> train;
  std::vector<DiseaseGenePair> validation;
  std::vector<DiseaseGenePair> test;
};

/// Every GeneDisease edge as a (disease, gene) pair, sorted.
std::vector<DiseaseGenePair> gene_disease_pairs(const HeteroGraph& graph);

/// Seeded shuffle, then floor(n * r) for validation and test; train keeps
/// the remainder. Each part is sorted.
EdgeSplit split_edges(const HeteroGraph& graph, const std::array<double, 3>& ratios, std::uint64_t seed);

/// Message-passing graph: `graph` without the validation and test edges.
HeteroGraph training_graph(const HeteroGraph& graph, const EdgeSplit& split);

/// Membership set over (disease, gene) pairs.
class PairSet {
 public:
  PairSet() = default;
  explicit PairSet(std::span<const DiseaseGenePair> pairs) { insert(pairs); }
  void insert(std::span<const DiseaseGenePair> pairs);
  bool contains(DiseaseGenePair p) const { return set_.contains(key(p)); }
  std::size_t size() const noexcept { return set_.size(); }

 private:
  static std::uint64_t key(DiseaseGenePair p) noexcept { return (std::uint64_t{p.disease} << 32) | p.gene; }
  std::unordered_set<std::uint64_t> set_;
};

/// Uniform draws over the unobserved pairs by rejection. Duplicates are
/// allowed. ExhaustedSpace when every pair is observed.
std::vector<DiseaseGenePair> sample_negatives(std::size_t n_diseases, std::size_t n_genes,
                                              const PairSet& observed, std::size_t count,
                                              std::uint64_t seed);
std::vector<DiseaseGenePair> sample_negatives(const HeteroGraph& graph, std::size_t count,
                                              std::uint64_t seed,
                                              std::span<const DiseaseGenePair> extra_excluded = {});

/// Adam with bias correction, one moment pair per parameter value.
class Adam {
 public:
  Adam(double lr, double beta1, double beta2, double eps);
  explicit Adam(const TrainConfig& c) : Adam(c.learning_rate, c.beta1, c.beta2, c.eps) {}
  void step(ad::ParameterStore& params);
  std::size_t steps() const noexcept { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  std::size_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

/// Everything a training run needs, prepared once.
struct TrainingData {
  HeteroGraph graph;  // message-passing graph (validation/test edges removed)
  ForwardPlan plan;
  EdgeSplit split;
  PairSet observed;                                // every known positive, any split
  std::vector<DiseaseGenePair> validation_negatives;
};

/// `extra_positives` are known positives outside the graph (e.g. a
/// withheld benchmark set); they are never sampled as negatives.
TrainingData prepare_training(const HeteroGraph& graph, const ModelConfig& model, const TrainConfig& train,
                              std::span<const DiseaseGenePair> extra_positives = {});

struct EpochReport {
  std::size_t epoch = 0;
  double mean_loss = 0.0;  // per scored pair
  std::size_t batches = 0;
};

/// Positives per optimizer step for a training set of `n_train` pairs.
std::size_t step_size(const TrainConfig& config, std::size_t n_train);

/// One pass over the shuffled training positives. Every step draws fresh
/// negatives; with masking, the step's positives are removed from the
/// message-passing graph and a new instance plan is sampled for it.
EpochReport train_epoch(CometModel& model, Adam& optimizer, const TrainingData& data, const TrainConfig& config,
                        std::uint64_t epoch_seed);

struct Checkpoint {
  ModelConfig model;
  std::size_t epoch = 0;
  double validation_auc = 0.0;
  double validation_aupr = 0.0;
  ad::ParameterStore params;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Layout: magic "CMTCKPT1", u32 version, u64 epoch, f64 validation AUC,
/// f64 validation AUPR, u64 config length, config key=value text, then the
/// parameter container.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);
/// Model rebuilt from a checkpoint's config and parameters.
CometModel restore_model(const Checkpoint& ckpt);

/// Stops once `patience` consecutive updates fail to beat the best value.
class EarlyStopper {
 public:
  explicit EarlyStopper(std::size_t patience) : patience_(patience) {}
  /// Returns true when the new value is the best so far.
  bool update(double value);
  bool should_stop() const noexcept { return stale_ >= patience_; }
  double best() const noexcept { return best_; }

 private:
  std::size_t patience_;
  std::size_t stale_ = 0;
  double best_ = -1.0;
  bool any_ = false;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  double validation_auc = 0.0;
  double validation_aupr = 0.0;
};

struct FitResult {
  Checkpoint best;
  std::vector<EpochRecord> history;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Trains for up to `config.epochs`, early-stopping on validation AUC.
/// `model` ends holding the best parameters.
FitResult fit(CometModel& model, const TrainingData& data, const TrainConfig& config,
              const EpochCallback& on_epoch = {});

/// Validation AUC and AUPR of the current parameters.
std::pair<double, double> validation_metrics(const CometModel& model, const TrainingData& data);

}  // namespace comet
