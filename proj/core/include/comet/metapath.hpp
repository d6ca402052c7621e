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
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "comet/hetgraph.hpp"

namespace comet {

/// The seven metapath schemas, plus DG, the compiled reverse of GD, which is
/// only used when explicitly enabled.
enum class SchemaId : std::uint8_t { GG, GHG, GOG, GD, DD, GDG, DGD, DG };

inline constexpr std::size_t kNumSchemaIds = 8;
inline constexpr std::size_t kMaxPathLength = 3;

constexpr std::size_t index_of(SchemaId s) noexcept { return static_cast<std::size_t>(s); }

struct MetapathSchema {
  SchemaId id = SchemaId::GG;
  std::vector<NodeType> node_types;
  std::vector<RelationType> relations;
  bool symmetric = false;

  std::size_t length() const noexcept { return node_types.size(); }
};

/// GG, GHG, GOG, GD, DD, GDG, DGD in that order.
std::vector<MetapathSchema> compile_schemas();
const MetapathSchema& schema(SchemaId id);

std::string_view name(SchemaId id) noexcept;             // "GDG"
std::string_view ablation_label(SchemaId id) noexcept;   // "g-d-g"
std::optional<SchemaId> parse_schema(std::string_view s) noexcept;  // either spelling

struct MetapathInstance {
  SchemaId schema = SchemaId::GG;
  std::vector<NodeId> nodes;

  bool operator==(const MetapathInstance&) const = default;
};

/// Instances of one schema rooted at `target`, stored flat: instance k
/// occupies node indices [k*L, (k+1)*L) and position p has type
/// schema.node_types[p].
struct InstanceSet {
  NodeId target;
  SchemaId schema = SchemaId::GG;
  std::size_t length = 0;
  std::vector<std::uint32_t> flat;

  std::size_t size() const noexcept { return length ? flat.size() / length : 0; }
  bool empty() const noexcept { return flat.empty(); }
  std::span<const std::uint32_t> indices(std::size_t k) const {
    return {flat.data() + k * length, length};
  }
  MetapathInstance instance(std::size_t k) const;
};

inline constexpr std::size_t kDefaultInstanceCap = 64;

/// Total number of walks conforming to `s` from `start`, without enumerating.
std::uint64_t count_instances(const HeteroGraph& graph, SchemaId s, NodeId start);

/// Every walk from `start` conforming to the schema (node repetition allowed),
/// in lexicographic order of the intermediate and end indices.
InstanceSet enumerate_instances(const HeteroGraph& graph, SchemaId s, NodeId start);

/// Uniform sample without replacement of at most `cap` instances; identical
/// to enumerate_instances when the total does not exceed `cap`. Sampled
/// instances keep enumeration order. Deterministic per (seed, start, schema).
InstanceSet sample_instances(const HeteroGraph& graph, SchemaId s, NodeId start,
                             std::size_t cap, std::uint64_t seed);

/// End node of each instance; duplicates preserved.
std::vector<NodeId> metapath_neighbors(const InstanceSet& set);

/// Type and adjacency check of an instance against its schema.
bool conforms(const HeteroGraph& graph, const MetapathInstance& inst);

struct SchemaOptions {
  bool include_reverse_gd = false;
  std::vector<SchemaId> dropped;
};

/// Gene targets: GG, GHG, GOG, GDG, GD. Disease targets: DD, DGD (+ DG when
/// enabled). Other node types have no schemas.
std::vector<SchemaId> schemas_for_target(NodeType type, const SchemaOptions& options = {});

/// All sampled instances of one schema for every node of the target type.
struct SchemaBatch {
  SchemaId schema = SchemaId::GG;
  std::size_t length = 0;
  std::size_t num_targets = 0;
  std::vector<std::uint32_t> flat;      // per-type node indices, length * count
  std::vector<std::uint32_t> segment;   // target index of each instance

  std::size_t count() const noexcept { return segment.size(); }
};

struct InstancePlan {
  NodeType target_type = NodeType::Gene;
  std::vector<SchemaBatch> batches;  // in schemas_for_target order
};

/// Samples instances for every node of `target_type` under each applicable
/// schema. Parallel over targets; output is independent of thread count.
InstancePlan build_instance_plan(const HeteroGraph& graph, NodeType target_type,
                                 const SchemaOptions& options, std::size_t cap,
                                 std::uint64_t seed);

}  // namespace comet
