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

#include <map>
#include <set>

#include "comet/error.hpp"
#include "comet/metapath.hpp"
#include "comet/parallel.hpp"
#include "support/graphs.hpp"
#include "support/oracles.hpp"

namespace comet {
namespace {

std::vector<std::vector<std::uint32_t>> walks_of(const InstanceSet& set) {
  std::vector<std::vector<std::uint32_t>> out;
  for (std::size_t k = 0; k < set.size(); ++k) {
    auto idx = set.indices(k);
    out.emplace_back(idx.begin(), idx.end());
  }
  return out;
}

TEST(Metapath, SevenSchemasInFixedOrder) {
  const auto all = compile_schemas();
  ASSERT_EQ(all.size(), 7u);
  const SchemaId expected[] = {SchemaId::GG, SchemaId::GHG, SchemaId::GOG, SchemaId::GD,
                               SchemaId::DD, SchemaId::GDG, SchemaId::DGD};
  for (std::size_t i = 0; i < 7; ++i) {
    EXPECT_EQ(all[i].id, expected[i]);
    EXPECT_EQ(all[i].relations.size() + 1, all[i].length());
    for (std::size_t p = 0; p + 1 < all[i].length(); ++p) {
      EXPECT_EQ(source_type(all[i].relations[p]), all[i].node_types[p]);
      EXPECT_EQ(target_type(all[i].relations[p]), all[i].node_types[p + 1]);
    }
    const bool palindrome = all[i].node_types.front() == all[i].node_types.back();
    EXPECT_EQ(all[i].symmetric, palindrome);
  }
}

TEST(Metapath, ParsesBothSpellings) {
  EXPECT_EQ(parse_schema("GDG"), SchemaId::GDG);
  EXPECT_EQ(parse_schema("g-d-g"), SchemaId::GDG);
  EXPECT_EQ(ablation_label(SchemaId::DGD), "d-g-d");
  EXPECT_FALSE(parse_schema("GXG").has_value());
}

TEST(Metapath, EnumerationMatchesBruteForce) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto g = testing::random_graph({.genes = 9, .diseases = 5, .go = 4, .pheno = 4, .density = 0.3}, seed);
    for (const auto& s : compile_schemas()) {
      const auto t = s.node_types.front();
      for (std::uint32_t i = 0; i < g.node_count(t); ++i) {
        const auto set = enumerate_instances(g, s.id, {t, i});
        const auto expected = testing::brute_force_walks(g, s.id, {t, i});
        EXPECT_EQ(walks_of(set), expected) << name(s.id) << " start " << i;
        EXPECT_EQ(count_instances(g, s.id, {t, i}), expected.size());
      }
    }
  }
}

TEST(Metapath, WrongStartTypeRejected) {
  const auto g = testing::random_graph({}, 1);
  try {
    enumerate_instances(g, SchemaId::DD, {NodeType::Gene, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SchemaStartMismatch);
  }
}

TEST(Metapath, InstancesConformToSchema) {
  const auto g = testing::random_graph({.genes = 8, .density = 0.5}, 7);
  for (const auto& s : compile_schemas()) {
    const auto set = enumerate_instances(g, s.id, {s.node_types.front(), 0});
    for (std::size_t k = 0; k < set.size(); ++k) EXPECT_TRUE(conforms(g, set.instance(k)));
  }
  MetapathInstance bad{SchemaId::GD, {{NodeType::Gene, 0}, {NodeType::Gene, 1}}};
  EXPECT_FALSE(conforms(g, bad));
}

TEST(Metapath, SymmetricSchemasReachTheStart) {
  const auto g = testing::random_graph({.genes = 8, .diseases = 4, .density = 0.5}, 2);
  for (std::uint32_t i = 0; i < g.node_count(NodeType::Gene); ++i) {
    const NodeId v{NodeType::Gene, i};
    if (g.neighbors(v, RelationType::GeneDisease).empty()) continue;
    const auto nb = metapath_neighbors(enumerate_instances(g, SchemaId::GDG, v));
    EXPECT_NE(std::find(nb.begin(), nb.end(), v), nb.end());
  }
}

TEST(Metapath, SamplingBelowCapIsEnumeration) {
  const auto g = testing::random_graph({.genes = 8, .density = 0.4}, 5);
  for (const auto& s : compile_schemas()) {
    const NodeId v{s.node_types.front(), 1};
    const auto full = enumerate_instances(g, s.id, v);
    const auto sampled = sample_instances(g, s.id, v, full.size() + 1, 99);
    EXPECT_EQ(sampled.flat, full.flat);
  }
}

TEST(Metapath, SamplingIsDistinctOrderedSubset) {
  const auto g = testing::random_graph({.genes = 20, .go = 8, .density = 0.6}, 8);
  const NodeId v{NodeType::Gene, 0};
  const auto full = walks_of(enumerate_instances(g, SchemaId::GOG, v));
  ASSERT_GT(full.size(), 10u);
  const auto sampled = walks_of(sample_instances(g, SchemaId::GOG, v, 10, 3));
  ASSERT_EQ(sampled.size(), 10u);
  EXPECT_TRUE(std::is_sorted(sampled.begin(), sampled.end()));
  EXPECT_EQ(std::adjacent_find(sampled.begin(), sampled.end()), sampled.end());
  for (const auto& w : sampled) EXPECT_TRUE(std::binary_search(full.begin(), full.end(), w));
  EXPECT_EQ(walks_of(sample_instances(g, SchemaId::GOG, v, 10, 3)), sampled);
}

// Each instance should be kept with probability cap / total. With 4000
// draws the per-instance count is Binomial(4000, p); a 6 sigma band keeps
// the test deterministic in practice while catching biased samplers.
TEST(Metapath, SamplingIsUniform) {
  const auto g = testing::random_graph({.genes = 14, .go = 8, .density = 0.6}, 12);
  NodeId v{NodeType::Gene, 0};
  for (std::uint32_t i = 1; i < 14; ++i)
    if (count_instances(g, SchemaId::GOG, {NodeType::Gene, i}) > count_instances(g, SchemaId::GOG, v)) v.index = i;
  const auto full = walks_of(enumerate_instances(g, SchemaId::GOG, v));
  const std::size_t cap = 5;
  ASSERT_GT(full.size(), 2 * cap);
  std::map<std::vector<std::uint32_t>, std::size_t> hits;
  const std::size_t draws = 4000;
  for (std::uint64_t s = 0; s < draws; ++s)
    for (auto& w : walks_of(sample_instances(g, SchemaId::GOG, v, cap, s))) ++hits[w];
  const double p = static_cast<double>(cap) / static_cast<double>(full.size());
  const double mean = p * draws, sd = std::sqrt(draws * p * (1 - p));
  for (const auto& w : full) EXPECT_NEAR(static_cast<double>(hits[w]), mean, 6 * sd);
}

TEST(Metapath, ZeroCapRejected) {
  const auto g = testing::random_graph({}, 1);
  EXPECT_THROW(sample_instances(g, SchemaId::GG, {NodeType::Gene, 0}, 0, 1), Error);
}

TEST(Metapath, SchemasPerTarget) {
  const auto genes = schemas_for_target(NodeType::Gene);
  EXPECT_EQ(genes, (std::vector<SchemaId>{SchemaId::GG, SchemaId::GHG, SchemaId::GOG, SchemaId::GDG, SchemaId::GD}));
  EXPECT_EQ(schemas_for_target(NodeType::Disease), (std::vector<SchemaId>{SchemaId::DD, SchemaId::DGD}));
  SchemaOptions opts{.include_reverse_gd = true, .dropped = {SchemaId::DD}};
  EXPECT_EQ(schemas_for_target(NodeType::Disease, opts), (std::vector<SchemaId>{SchemaId::DGD, SchemaId::DG}));
  EXPECT_TRUE(schemas_for_target(NodeType::GoTerm).empty());
}

TEST(Metapath, InstancePlanIndependentOfThreads) {
  const auto g = testing::random_graph({.genes = 30, .diseases = 8, .go = 6, .pheno = 6, .density = 0.4}, 21);
  set_num_threads(1);
  const auto a = build_instance_plan(g, NodeType::Gene, {}, 4, 77);
  set_num_threads(4);
  const auto b = build_instance_plan(g, NodeType::Gene, {}, 4, 77);
  set_num_threads(1);
  ASSERT_EQ(a.batches.size(), b.batches.size());
  for (std::size_t i = 0; i < a.batches.size(); ++i) {
    EXPECT_EQ(a.batches[i].flat, b.batches[i].flat);
    EXPECT_EQ(a.batches[i].segment, b.batches[i].segment);
  }
}

}  // namespace
}  // namespace comet
