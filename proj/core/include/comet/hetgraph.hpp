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
#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace comet {

// Declaration order is the iteration order everywhere in the library.
enum class NodeType : std::uint8_t { Gene, Disease, GoTerm, Phenotype };

enum class RelationType : std::uint8_t {
  GeneGene,
  GeneGo,
  GoGene,
  GenePheno,
  PhenoGene,
  DiseaseDisease,
  GeneDisease,
  DiseaseGene,
};

inline constexpr std::size_t kNumNodeTypes = 4;
inline constexpr std::size_t kNumRelations = 8;

inline constexpr std::array<NodeType, kNumNodeTypes> kNodeTypes = {
    NodeType::Gene, NodeType::Disease, NodeType::GoTerm, NodeType::Phenotype};

inline constexpr std::array<RelationType, kNumRelations> kRelations = {
    RelationType::GeneGene,   RelationType::GeneGo,        RelationType::GoGene,
    RelationType::GenePheno,  RelationType::PhenoGene,     RelationType::DiseaseDisease,
    RelationType::GeneDisease, RelationType::DiseaseGene};

constexpr std::size_t index_of(NodeType t) noexcept { return static_cast<std::size_t>(t); }
constexpr std::size_t index_of(RelationType r) noexcept { return static_cast<std::size_t>(r); }

constexpr NodeType source_type(RelationType r) noexcept {
  switch (r) {
    case RelationType::GeneGene:
    case RelationType::GeneGo:
    case RelationType::GenePheno:
    case RelationType::GeneDisease: return NodeType::Gene;
    case RelationType::GoGene: return NodeType::GoTerm;
    case RelationType::PhenoGene: return NodeType::Phenotype;
    case RelationType::DiseaseDisease:
    case RelationType::DiseaseGene: return NodeType::Disease;
  }
  return NodeType::Gene;
}

constexpr RelationType reverse(RelationType r) noexcept {
  switch (r) {
    case RelationType::GeneGene: return RelationType::GeneGene;
    case RelationType::GeneGo: return RelationType::GoGene;
    case RelationType::GoGene: return RelationType::GeneGo;
    case RelationType::GenePheno: return RelationType::PhenoGene;
    case RelationType::PhenoGene: return RelationType::GenePheno;
    case RelationType::DiseaseDisease: return RelationType::DiseaseDisease;
    case RelationType::GeneDisease: return RelationType::DiseaseGene;
    case RelationType::DiseaseGene: return RelationType::GeneDisease;
  }
  return r;
}

constexpr NodeType target_type(RelationType r) noexcept { return source_type(reverse(r)); }

std::string_view name(NodeType t) noexcept;
std::string_view name(RelationType r) noexcept;
/// Lower-case file stem used by the data directory layout ("gene", "gene_go").
std::string_view file_stem(NodeType t) noexcept;
std::string_view file_stem(RelationType r) noexcept;
std::optional<NodeType> parse_node_type(std::string_view s) noexcept;
std::optional<RelationType> parse_relation(std::string_view s) noexcept;

struct NodeId {
  NodeType type = NodeType::Gene;
  std::uint32_t index = 0;

  friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

/// An association candidate by per-type index.
struct DiseaseGenePair {
  std::uint32_t disease = 0;
  std::uint32_t gene = 0;

  friend auto operator<=>(const DiseaseGenePair&, const DiseaseGenePair&) = default;
};

struct EdgeListFormat {
  char separator = '\t';
  std::string comment_prefix = "#";
  bool has_header = false;
  // Column mapping lets sources that list (target, source) reuse the format.
  std::size_t src_column = 0;
  std::size_t dst_column = 1;
};

struct IngestReport {
  std::size_t edges_added = 0;
  std::size_t nodes_added = 0;
  std::size_t lines_skipped = 0;
  std::size_t self_loops_dropped = 0;
};

struct FeatureLoadReport {
  std::size_t rows_loaded = 0;
  std::size_t unknown_labels = 0;
  std::size_t rows_filled = 0;
  std::size_t dim = 0;
};

/// Dense row-major node feature matrix, one row per node of a type.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  bool operator==(const FeatureMatrix&) const = default;
};

struct GraphStats {
  std::array<std::size_t, kNumNodeTypes> nodes{};
  std::array<std::size_t, kNumRelations> edges{};  // directed, as stored
};

/// Seeded Xavier-style fill for one row: uniform in [-a, a], a = sqrt(6 / dim).
void fill_random_feature_row(std::span<double> row, std::uint64_t seed, NodeType type,
                             std::uint32_t index);

/// Typed heterogeneous graph. Built single-writer; `freeze()` compacts each
/// relation into CSR form, after which topology and features are immutable.
class HeteroGraph {
 public:
  HeteroGraph() = default;

  NodeId add_node(NodeType type, std::string_view label);
  /// Returns the existing node for `label` or registers it.
  NodeId ensure_node(NodeType type, std::string_view label, bool* created = nullptr);
  std::optional<NodeId> find(NodeType type, std::string_view label) const;

  /// Inserts (src, dst) under `rel` and (dst, src) under reverse(rel).
  /// Returns false when the edge was already present.
  bool add_edge(NodeId src, NodeId dst, RelationType rel);

  IngestReport ingest_edge_list(const std::filesystem::path& path, RelationType rel,
                                const EdgeListFormat& format = {});

  /// Rows absent from the file are filled with the seeded random init.
  FeatureLoadReport load_node_features(const std::filesystem::path& path, NodeType type,
                                       std::uint64_t seed);
  void set_features(NodeType type, FeatureMatrix features);
  /// Replaces every row of `type` with the seeded random init of width `dim`.
  void randomize_features(NodeType type, std::size_t dim, std::uint64_t seed);

  std::span<const std::uint32_t> neighbors(NodeId node, RelationType rel) const;
  bool has_edge(NodeId src, NodeId dst, RelationType rel) const;

  std::size_t node_count(NodeType type) const noexcept { return labels_[index_of(type)].size(); }
  std::size_t edge_count(RelationType rel) const noexcept;
  const std::string& label(NodeId node) const;
  const FeatureMatrix* features(NodeType type) const noexcept;
  GraphStats stats() const;

  void freeze();
  bool frozen() const noexcept { return frozen_; }

  /// Frozen copy with the given (src, dst) pairs of `rel` (and their
  /// reverses) removed. Node set and features are unchanged.
  HeteroGraph without_edges(RelationType rel,
                            std::span<const std::pair<NodeId, NodeId>> edges) const;
  /// Unfrozen deep copy, so features can be swapped for an ablation run.
  HeteroGraph thawed_copy() const;

 private:
  struct Csr {
    std::vector<std::size_t> offsets;  // node_count + 1
    std::vector<std::uint32_t> targets;
  };

  void check_node(NodeId node) const;
  void check_mutable() const;
  bool insert_sorted(RelationType rel, std::uint32_t src, std::uint32_t dst);

  std::array<std::vector<std::string>, kNumNodeTypes> labels_;
  std::array<std::unordered_map<std::string, std::uint32_t>, kNumNodeTypes> index_;
  // Build-time adjacency; emptied by freeze().
  std::array<std::vector<std::vector<std::uint32_t>>, kNumRelations> lists_;
  std::array<Csr, kNumRelations> csr_;
  std::array<std::size_t, kNumRelations> edge_counts_{};
  std::array<std::optional<FeatureMatrix>, kNumNodeTypes> features_;
  bool frozen_ = false;
};

}  // namespace comet
