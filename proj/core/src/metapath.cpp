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

#include "comet/metapath.hpp"

#include <algorithm>
#include <array>
#include <random>
#include <string>
#include <unordered_set>

#include "comet/error.hpp"
#include "comet/parallel.hpp"
#include "comet/rng.hpp"

namespace comet {

namespace {

using N = NodeType;
using R = RelationType;

MetapathSchema make(SchemaId id, std::vector<NodeType> types, std::vector<RelationType> rels) {
  MetapathSchema s{id, std::move(types), std::move(rels), false};
  s.symmetric = std::equal(s.node_types.begin(), s.node_types.end(), s.node_types.rbegin());
  return s;
}

const std::array<MetapathSchema, kNumSchemaIds>& table() {
  static const std::array<MetapathSchema, kNumSchemaIds> t = {
      make(SchemaId::GG, {N::Gene, N::Gene}, {R::GeneGene}),
      make(SchemaId::GHG, {N::Gene, N::Phenotype, N::Gene}, {R::GenePheno, R::PhenoGene}),
      make(SchemaId::GOG, {N::Gene, N::GoTerm, N::Gene}, {R::GeneGo, R::GoGene}),
      make(SchemaId::GD, {N::Gene, N::Disease}, {R::GeneDisease}),
      make(SchemaId::DD, {N::Disease, N::Disease}, {R::DiseaseDisease}),
      make(SchemaId::GDG, {N::Gene, N::Disease, N::Gene}, {R::GeneDisease, R::DiseaseGene}),
      make(SchemaId::DGD, {N::Disease, N::Gene, N::Disease}, {R::DiseaseGene, R::GeneDisease}),
      make(SchemaId::DG, {N::Disease, N::Gene}, {R::DiseaseGene}),
  };
  return t;
}

constexpr std::array<std::string_view, kNumSchemaIds> kNames = {"GG", "GHG", "GOG", "GD",
                                                                 "DD", "GDG", "DGD", "DG"};
constexpr std::array<std::string_view, kNumSchemaIds> kLabels = {
    "g-g", "g-h-g", "g-o-g", "g-d", "d-d", "g-d-g", "d-g-d", "d-g"};

void check_start(const MetapathSchema& s, NodeId start) {
  if (start.type != s.node_types.front())
    throw Error(ErrorCode::SchemaStartMismatch,
                std::string(name(s.id)) + " starts at " + std::string(name(s.node_types.front())) +
                    ", got " + std::string(name(start.type)));
}

// Decodes the k-th walk in enumeration order.
void decode(const HeteroGraph& graph, const MetapathSchema& s, NodeId start,
            std::span<const std::uint64_t> prefix, std::uint64_t k, std::uint32_t* out) {
  out[0] = start.index;
  auto first = graph.neighbors(start, s.relations[0]);
  if (s.length() == 2) {
    out[1] = first[k];
    return;
  }
  // prefix[m] = number of walks through intermediates first[0..m).
  const auto it = std::upper_bound(prefix.begin(), prefix.end(), k);
  const auto m = static_cast<std::size_t>(it - prefix.begin()) - 1;
  out[1] = first[m];
  out[2] = graph.neighbors({s.node_types[1], first[m]}, s.relations[1])[k - prefix[m]];
}

}  // namespace

std::vector<MetapathSchema> compile_schemas() {
  const auto& t = table();
  return {t.begin(), t.begin() + 7};
}

const MetapathSchema& schema(SchemaId id) { return table()[index_of(id)]; }

std::string_view name(SchemaId id) noexcept { return kNames[index_of(id)]; }
std::string_view ablation_label(SchemaId id) noexcept { return kLabels[index_of(id)]; }

std::optional<SchemaId> parse_schema(std::string_view s) noexcept {
  for (std::size_t i = 0; i < kNumSchemaIds; ++i)
    if (s == kNames[i] || s == kLabels[i]) return static_cast<SchemaId>(i);
  return std::nullopt;
}

MetapathInstance InstanceSet::instance(std::size_t k) const {
  const auto& s = comet::schema(schema);
  MetapathInstance inst{schema, {}};
  auto idx = indices(k);
  for (std::size_t p = 0; p < length; ++p) inst.nodes.push_back({s.node_types[p], idx[p]});
  return inst;
}

std::uint64_t count_instances(const HeteroGraph& graph, SchemaId id, NodeId start) {
  const auto& s = schema(id);
  check_start(s, start);
  auto first = graph.neighbors(start, s.relations[0]);
  if (s.length() == 2) return first.size();
  std::uint64_t total = 0;
  for (auto m : first) total += graph.neighbors({s.node_types[1], m}, s.relations[1]).size();
  return total;
}

InstanceSet enumerate_instances(const HeteroGraph& graph, SchemaId id, NodeId start) {
  const auto& s = schema(id);
  check_start(s, start);
  InstanceSet set{start, id, s.length(), {}};
  auto first = graph.neighbors(start, s.relations[0]);
  if (s.length() == 2) {
    for (auto j : first) set.flat.insert(set.flat.end(), {start.index, j});
    return set;
  }
  for (auto m : first)
    for (auto j : graph.neighbors({s.node_types[1], m}, s.relations[1]))
      set.flat.insert(set.flat.end(), {start.index, m, j});
  return set;
}

InstanceSet sample_instances(const HeteroGraph& graph, SchemaId id, NodeId start,
                             std::size_t cap, std::uint64_t seed) {
  if (cap == 0) throw Error(ErrorCode::InvalidConfig, "instance cap must be >= 1");
  const auto& s = schema(id);
  check_start(s, start);
  auto first = graph.neighbors(start, s.relations[0]);
  std::vector<std::uint64_t> prefix(first.size() + 1, 0);
  for (std::size_t m = 0; m < first.size(); ++m) {
    const std::uint64_t width =
        s.length() == 2 ? 1 : graph.neighbors({s.node_types[1], first[m]}, s.relations[1]).size();
    prefix[m + 1] = prefix[m] + width;
  }
  const std::uint64_t total = prefix.back();
  if (total <= cap) return enumerate_instances(graph, id, start);

  // Floyd's algorithm: cap distinct indices, uniform over all cap-subsets.
  auto rng = make_rng(seed, {0x5A3B1EULL, index_of(start.type), start.index, index_of(id)});
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(cap * 2);
  for (std::uint64_t j = total - cap; j < total; ++j) {
    std::uniform_int_distribution<std::uint64_t> dist(0, j);
    const auto t = dist(rng);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  std::vector<std::uint64_t> picks(chosen.begin(), chosen.end());
  std::sort(picks.begin(), picks.end());

  InstanceSet set{start, id, s.length(), std::vector<std::uint32_t>(cap * s.length())};
  for (std::size_t i = 0; i < picks.size(); ++i)
    decode(graph, s, start, prefix, picks[i], set.flat.data() + i * s.length());
  return set;
}

std::vector<NodeId> metapath_neighbors(const InstanceSet& set) {
  std::vector<NodeId> out;
  out.reserve(set.size());
  const auto end_type = schema(set.schema).node_types.back();
  for (std::size_t k = 0; k < set.size(); ++k) out.push_back({end_type, set.indices(k).back()});
  return out;
}

bool conforms(const HeteroGraph& graph, const MetapathInstance& inst) {
  const auto& s = schema(inst.schema);
  if (inst.nodes.size() != s.length()) return false;
  for (std::size_t p = 0; p < s.length(); ++p) {
    if (inst.nodes[p].type != s.node_types[p]) return false;
    if (inst.nodes[p].index >= graph.node_count(inst.nodes[p].type)) return false;
  }
  for (std::size_t p = 0; p + 1 < s.length(); ++p)
    if (!graph.has_edge(inst.nodes[p], inst.nodes[p + 1], s.relations[p])) return false;
  return true;
}

std::vector<SchemaId> schemas_for_target(NodeType type, const SchemaOptions& options) {
  std::vector<SchemaId> out;
  switch (type) {
    case NodeType::Gene:
      out = {SchemaId::GG, SchemaId::GHG, SchemaId::GOG, SchemaId::GDG, SchemaId::GD};
      break;
    case NodeType::Disease:
      out = {SchemaId::DD, SchemaId::DGD};
      if (options.include_reverse_gd) out.push_back(SchemaId::DG);
      break;
    default: break;
  }
  std::erase_if(out, [&](SchemaId s) {
    return std::find(options.dropped.begin(), options.dropped.end(), s) != options.dropped.end();
  });
  return out;
}

InstancePlan build_instance_plan(const HeteroGraph& graph, NodeType target_type,
                                 const SchemaOptions& options, std::size_t cap,
                                 std::uint64_t seed) {
  InstancePlan plan{target_type, {}};
  const auto n = static_cast<std::uint32_t>(graph.node_count(target_type));
  for (auto id : schemas_for_target(target_type, options)) {
    std::vector<InstanceSet> sets(n);
    parallel_for(n, 16, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i)
        sets[i] = sample_instances(graph, id, {target_type, static_cast<std::uint32_t>(i)}, cap,
                                   seed);
    });
    SchemaBatch batch{id, schema(id).length(), n, {}, {}};
    for (std::uint32_t i = 0; i < n; ++i) {
      batch.flat.insert(batch.flat.end(), sets[i].flat.begin(), sets[i].flat.end());
      batch.segment.insert(batch.segment.end(), sets[i].size(), i);
    }
    plan.batches.push_back(std::move(batch));
  }
  return plan;
}

}  // namespace comet
