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

#include "comet/error.hpp"
#include "comet/hetgraph.hpp"
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
  return ErrorCode::FormatError;
}

TEST(HeteroGraph, ReverseRelationsAreInvolutions) {
  for (auto r : kRelations) {
    EXPECT_EQ(reverse(reverse(r)), r);
    EXPECT_EQ(source_type(reverse(r)), target_type(r));
  }
}

TEST(HeteroGraph, NamesRoundTrip) {
  for (auto t : kNodeTypes) EXPECT_EQ(parse_node_type(name(t)), t);
  for (auto r : kRelations) EXPECT_EQ(parse_relation(name(r)), r);
  EXPECT_FALSE(parse_node_type("Protein").has_value());
}

TEST(HeteroGraph, AddEdgeStoresBothDirections) {
  HeteroGraph g;
  auto a = g.add_node(NodeType::Gene, "A");
  auto d = g.add_node(NodeType::Disease, "D");
  EXPECT_TRUE(g.add_edge(a, d, RelationType::GeneDisease));
  EXPECT_FALSE(g.add_edge(a, d, RelationType::GeneDisease));
  g.freeze();
  EXPECT_TRUE(g.has_edge(a, d, RelationType::GeneDisease));
  EXPECT_TRUE(g.has_edge(d, a, RelationType::DiseaseGene));
  EXPECT_EQ(g.edge_count(RelationType::GeneDisease), 1u);
  EXPECT_EQ(g.edge_count(RelationType::DiseaseGene), 1u);
}

TEST(HeteroGraph, SymmetricRelationSelfLoopCountedOnce) {
  HeteroGraph g;
  auto a = g.add_node(NodeType::Gene, "A");
  g.add_edge(a, a, RelationType::GeneGene);
  g.freeze();
  EXPECT_EQ(g.neighbors(a, RelationType::GeneGene).size(), 1u);
}

TEST(HeteroGraph, ContractViolations) {
  HeteroGraph g;
  auto a = g.add_node(NodeType::Gene, "A");
  auto d = g.add_node(NodeType::Disease, "D");
  EXPECT_EQ(code_of([&] { g.add_node(NodeType::Gene, "A"); }), ErrorCode::DuplicateNode);
  EXPECT_EQ(code_of([&] { g.add_edge(d, a, RelationType::GeneDisease); }), ErrorCode::RelationTypeMismatch);
  EXPECT_EQ(code_of([&] { g.add_edge(a, {NodeType::Disease, 7}, RelationType::GeneDisease); }),
            ErrorCode::InvalidNode);
  g.freeze();
  EXPECT_EQ(code_of([&] { g.add_node(NodeType::Gene, "B"); }), ErrorCode::GraphFrozen);
  EXPECT_EQ(code_of([&] { g.label({NodeType::Gene, 3}); }), ErrorCode::InvalidNode);
}

TEST(HeteroGraph, NeighborsAreSortedAndMatchHasEdge) {
  const auto g = testing::random_graph({.genes = 15, .diseases = 6, .go = 5, .pheno = 5}, 3);
  for (auto r : kRelations) {
    const auto s = source_type(r), t = target_type(r);
    for (std::uint32_t i = 0; i < g.node_count(s); ++i) {
      auto nb = g.neighbors({s, i}, r);
      EXPECT_TRUE(std::is_sorted(nb.begin(), nb.end()));
      std::size_t hits = 0;
      for (std::uint32_t j = 0; j < g.node_count(t); ++j) hits += g.has_edge({s, i}, {t, j}, r) ? 1 : 0;
      EXPECT_EQ(hits, nb.size());
    }
  }
}

TEST(HeteroGraph, IngestCountsSkipsAndSelfLoops) {
  TempDir dir("ingest");
  {
    std::ofstream f(dir / "gg.tsv");
    f << "# comment\nA\tB\nB\tA\nA\tA\nbroken line\nC\tB\n\n";
  }
  HeteroGraph g;
  const auto rep = g.ingest_edge_list(dir / "gg.tsv", RelationType::GeneGene);
  EXPECT_EQ(rep.edges_added, 2u);  // A-B once, C-B; B-A duplicates A-B
  EXPECT_EQ(rep.nodes_added, 3u);
  EXPECT_EQ(rep.lines_skipped, 1u);
  EXPECT_EQ(rep.self_loops_dropped, 1u);
  EXPECT_EQ(code_of([&] { g.ingest_edge_list(dir / "missing.tsv", RelationType::GeneGene); }),
            ErrorCode::IoError);
}

TEST(HeteroGraph, FeatureLoadingFillsMissingRows) {
  TempDir dir("features");
  {
    std::ofstream f(dir / "gene.tsv");
    f << "A\t1\t2\t3\nZZ\t4\t5\t6\n";
  }
  HeteroGraph g;
  g.add_node(NodeType::Gene, "A");
  g.add_node(NodeType::Gene, "B");
  const auto rep = g.load_node_features(dir / "gene.tsv", NodeType::Gene, 9);
  EXPECT_EQ(rep.dim, 3u);
  EXPECT_EQ(rep.rows_loaded, 1u);
  EXPECT_EQ(rep.unknown_labels, 1u);
  EXPECT_EQ(rep.rows_filled, 1u);
  const auto* f = g.features(NodeType::Gene);
  ASSERT_NE(f, nullptr);
  EXPECT_EQ(f->row(0)[2], 3.0);
  // Filled rows use the seeded init bounded by sqrt(6 / dim).
  for (double v : f->row(1)) EXPECT_LE(std::abs(v), std::sqrt(6.0 / 3.0));
}

TEST(HeteroGraph, RaggedFeatureRowsRejected) {
  TempDir dir("ragged");
  {
    std::ofstream f(dir / "gene.tsv");
    f << "A\t1\t2\nB\t1\n";
  }
  HeteroGraph g;
  g.add_node(NodeType::Gene, "A");
  g.add_node(NodeType::Gene, "B");
  EXPECT_EQ(code_of([&] { g.load_node_features(dir / "gene.tsv", NodeType::Gene, 1); }),
            ErrorCode::FeatureDimMismatch);
}

TEST(HeteroGraph, RandomFeatureRowsAreSeeded) {
  std::vector<double> a(8), b(8), c(8);
  fill_random_feature_row(a, 5, NodeType::Gene, 2);
  fill_random_feature_row(b, 5, NodeType::Gene, 2);
  fill_random_feature_row(c, 5, NodeType::Gene, 3);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

TEST(HeteroGraph, WithoutEdgesRemovesBothDirections) {
  const auto g = testing::random_graph({.genes = 10, .diseases = 5, .density = 0.6}, 11);
  std::vector<std::pair<NodeId, NodeId>> drop;
  for (std::uint32_t gi = 0; gi < 10 && drop.size() < 3; ++gi)
    for (auto d : g.neighbors({NodeType::Gene, gi}, RelationType::GeneDisease))
      if (drop.size() < 3) drop.push_back({{NodeType::Gene, gi}, {NodeType::Disease, d}});
  ASSERT_EQ(drop.size(), 3u);
  const auto h = g.without_edges(RelationType::GeneDisease, drop);
  EXPECT_EQ(h.edge_count(RelationType::GeneDisease), g.edge_count(RelationType::GeneDisease) - 3);
  for (auto& [s, t] : drop) {
    EXPECT_FALSE(h.has_edge(s, t, RelationType::GeneDisease));
    EXPECT_FALSE(h.has_edge(t, s, RelationType::DiseaseGene));
  }
  EXPECT_EQ(h.edge_count(RelationType::GeneGene), g.edge_count(RelationType::GeneGene));
  EXPECT_EQ(*h.features(NodeType::Gene), *g.features(NodeType::Gene));
}

TEST(HeteroGraph, ThawedCopyIsMutableAndEqual) {
  const auto g = testing::random_graph({}, 4);
  auto h = g.thawed_copy();
  EXPECT_FALSE(h.frozen());
  h.freeze();
  for (auto r : kRelations) EXPECT_EQ(h.edge_count(r), g.edge_count(r));
}

}  // namespace
}  // namespace comet
