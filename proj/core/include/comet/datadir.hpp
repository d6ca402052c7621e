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
#include <optional>
#include <vector>

#include "comet/hetgraph.hpp"

namespace comet {

/// On-disk layout shared by the generator and every loader:
///   edges/<relation stem>.tsv    two labels per row, source first
///   features/<type stem>.tsv     label then values, tab separated
///   splits/heldout.tsv           gene<TAB>disease rows withheld from edges
/// Only the forward relations are read; reverses are implied.
inline constexpr std::array<RelationType, 5> kStoredRelations = {
    RelationType::GeneGene, RelationType::GeneGo, RelationType::GenePheno,
    RelationType::DiseaseDisease, RelationType::GeneDisease};

inline constexpr std::size_t kDefaultRandomFeatureDim = 16;

struct DataDirReport {
  std::array<std::optional<IngestReport>, kNumRelations> edges;
  std::array<std::optional<FeatureLoadReport>, kNumNodeTypes> features;
  std::array<bool, kNumNodeTypes> randomized{};
  std::size_t heldout = 0;
};

struct LoadedData {
  HeteroGraph graph;  // frozen
  std::vector<DiseaseGenePair> heldout;
  DataDirReport report;
  std::uint64_t data_hash = 0;  // FNV-1a over every file read, in layout order
};

std::filesystem::path edge_file(const std::filesystem::path& dir, RelationType rel);
std::filesystem::path feature_file(const std::filesystem::path& dir, NodeType type);
std::filesystem::path heldout_file(const std::filesystem::path& dir);

/// Node rows are registered in feature-file order first, so isolated nodes
/// survive and indices are stable. Types without a feature file get the
/// seeded random init of width `random_dim`.
LoadedData load_data_dir(const std::filesystem::path& dir, std::uint64_t feature_seed,
                         std::size_t random_dim = kDefaultRandomFeatureDim);

/// Writes `graph` in the layout above. Features are written with full
/// round-trip precision.
void write_data_dir(const HeteroGraph& graph, std::span<const DiseaseGenePair> heldout,
                    const std::filesystem::path& dir);

/// FNV-1a of a file's bytes; IoError when unreadable.
std::uint64_t hash_file(const std::filesystem::path& path);

}  // namespace comet
