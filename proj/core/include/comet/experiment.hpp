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

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "comet/hetgraph.hpp"
#include "comet/metrics.hpp"
#include "comet/model.hpp"
#include "comet/trainer.hpp"

namespace comet {

/// 16 hex digits of FNV-1a over both configs' key=value text.
std::string config_fingerprint(const ModelConfig& model, const TrainConfig& train);

struct ExperimentResult {
  FitResult fit;
  EvalReport test;
  std::size_t test_positives = 0;
  bool used_heldout = false;  // test positives came from the withheld set
};

/// Trains on `graph` and evaluates the best checkpoint. Test positives are
/// `heldout` when non-empty, otherwise the split's test edges; negatives
/// are a balanced seeded sample outside every known positive.
ExperimentResult run_experiment(const HeteroGraph& graph, std::span<const DiseaseGenePair> heldout,
                                const ModelConfig& model, const TrainConfig& train,
                                const EpochCallback& on_epoch = {});

/// Seed for the test-negative sample of a run.
std::uint64_t evaluation_seed(const TrainConfig& train);

enum class AblationAxis { NodeFeatures, Encoder, DropSchema };

std::string_view name(AblationAxis axis) noexcept;
std::optional<AblationAxis> parse_axis(std::string_view s) noexcept;

/// Values accepted per axis: node_features random|file, encoder
/// transformer|average|maxpool, drop_schema one of the seven schemas.
void validate_axis_value(AblationAxis axis, std::string_view value);

/// Row label in the ablation table ("Random", "Average", "Max-Pooling",
/// "w/o g-d-g"); the unablated setting is "COMET".
std::string ablation_label(AblationAxis axis, std::string_view value);

/// Copy of `graph` with every feature matrix replaced by the seeded random
/// init of the same width.
HeteroGraph with_random_features(const HeteroGraph& graph, std::uint64_t seed);

struct AblationRow {
  std::string label;
  std::string fingerprint;
  std::vector<EvalReport> per_seed;
  EvalReport mean;  // field-wise mean over seeds; counts are summed
};

/// One row for the unablated model, then one per value. Every seed sets
/// both the training seed and the parameter init seed.
std::vector<AblationRow> ablate(const HeteroGraph& graph, std::span<const DiseaseGenePair> heldout,
                                const ModelConfig& base, const TrainConfig& train, AblationAxis axis,
                                std::span<const std::string> values, std::span<const std::uint64_t> seeds,
                                const std::function<void(const std::string&)>& log = {});

std::string format_ablation_table(std::span<const AblationRow> rows);
std::string ablation_json(std::span<const AblationRow> rows);

}  // namespace comet
