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
#include <span>
#include <vector>

#include "comet/hetgraph.hpp"

namespace comet {

struct SynthConfig {
  std::size_t n_genes = 200;
  std::size_t n_diseases = 40;
  std::size_t n_go = 50;
  std::size_t n_pheno = 50;
  std::size_t n_blocks = 8;
  double p_in = 0.3;
  double p_out = 0.01;
  std::size_t annotations = 3;  // GO terms and phenotypes per gene
  std::size_t feature_dim = 16;
  double feature_noise = 0.1;
  double centroid_scale = 1.0;  // std-dev of each block centroid coordinate
  double heldout_fraction = 0.1;
  std::uint64_t seed = 42;

  void validate() const;
};

struct SynthDataset {
  HeteroGraph graph;  // frozen
  std::array<std::vector<std::uint32_t>, kNumNodeTypes> blocks;
  std::vector<DiseaseGenePair> heldout;  // sorted
};

/// Planted block model. Node i of every type belongs to block i % n_blocks.
/// The heldout positives are chosen among same-block gene-disease pairs
/// before any edge is drawn and never become edges.
SynthDataset generate(const SynthConfig& config);

/// Data directory layout plus blocks.tsv (type, label, block).
void write_dataset(const SynthDataset& data, const std::filesystem::path& dir);

/// Baseline scorer: sum over genes g' linked to d of |GO(g) n GO(g')|.
std::vector<double> shared_go_scores(const HeteroGraph& graph, std::span<const DiseaseGenePair> pairs);

}  // namespace comet
