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
#include <set>

#include "comet/datadir.hpp"
#include "comet/error.hpp"
#include "comet/synthbench.hpp"
#include "comet/trainer.hpp"
#include "support/graphs.hpp"

namespace comet {
namespace {

using testing::TempDir;

SynthConfig small() {
  SynthConfig c;
  c.n_genes = 80;
  c.n_diseases = 20;
  c.n_go = 16;
  c.n_pheno = 16;
  c.n_blocks = 4;
  c.seed = 3;
  return c;
}

std::string read_all(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

TEST(Synth, DeterministicPerSeed) {
  const auto a = generate(small());
  const auto b = generate(small());
  auto c_cfg = small();
  c_cfg.seed = 4;
  const auto c = generate(c_cfg);
  EXPECT_EQ(a.heldout, b.heldout);
  EXPECT_EQ(gene_disease_pairs(a.graph), gene_disease_pairs(b.graph));
  EXPECT_EQ(*a.graph.features(NodeType::Gene), *b.graph.features(NodeType::Gene));
  EXPECT_NE(gene_disease_pairs(a.graph), gene_disease_pairs(c.graph));
}

TEST(Synth, BlocksAndLabels) {
  const auto d = generate(small());
  EXPECT_EQ(d.graph.node_count(NodeType::Gene), 80u);
  EXPECT_EQ(d.graph.label({NodeType::Gene, 5}), "G0006");  // labels are 1-based
  EXPECT_EQ(d.graph.label({NodeType::Disease, 5}), "D006");
  for (auto t : kNodeTypes)
    for (std::size_t i = 0; i < d.blocks[index_of(t)].size(); ++i) EXPECT_EQ(d.blocks[index_of(t)][i], i % 4);
}

TEST(Synth, HeldoutIsSameBlockAndNeverAnEdge) {
  const auto d = generate(small());
  // Same-block pairs: 4 blocks x 20 genes x 5 diseases = 400; 10% planted.
  EXPECT_EQ(d.heldout.size(), 40u);
  EXPECT_TRUE(std::is_sorted(d.heldout.begin(), d.heldout.end()));
  for (auto p : d.heldout) {
    EXPECT_EQ(p.gene % 4, p.disease % 4);
    EXPECT_FALSE(d.graph.has_edge({NodeType::Gene, p.gene}, {NodeType::Disease, p.disease}, RelationType::GeneDisease));
  }
}

// Edge densities inside and across blocks should be close to p_in / p_out.
// Counts are Binomial, so the bands are 6 standard deviations wide.
TEST(Synth, GeneGeneDensityMatchesBlockProbabilities) {
  auto cfg = small();
  cfg.n_genes = 200;
  const auto d = generate(cfg);
  double in_edges = 0, in_pairs = 0, out_edges = 0, out_pairs = 0;
  for (std::uint32_t i = 0; i < 200; ++i)
    for (std::uint32_t j = i + 1; j < 200; ++j) {
      const bool e = d.graph.has_edge({NodeType::Gene, i}, {NodeType::Gene, j}, RelationType::GeneGene);
      if (i % 4 == j % 4) {
        in_pairs += 1;
        in_edges += e;
      } else {
        out_pairs += 1;
        out_edges += e;
      }
    }
  EXPECT_NEAR(in_edges, cfg.p_in * in_pairs, 6 * std::sqrt(in_pairs * cfg.p_in * (1 - cfg.p_in)));
  EXPECT_NEAR(out_edges, cfg.p_out * out_pairs, 6 * std::sqrt(out_pairs * cfg.p_out * (1 - cfg.p_out)));
}

TEST(Synth, AnnotationsPerGene) {
  const auto d = generate(small());
  std::size_t own = 0, total = 0;
  for (std::uint32_t g = 0; g < 80; ++g) {
    const auto go = d.graph.neighbors({NodeType::Gene, g}, RelationType::GeneGo);
    EXPECT_EQ(go.size(), 3u);
    EXPECT_EQ(d.graph.neighbors({NodeType::Gene, g}, RelationType::GenePheno).size(), 3u);
    for (auto t : go) {
      own += t % 4 == g % 4;
      ++total;
    }
  }
  EXPECT_GT(static_cast<double>(own) / total, 0.9);
}

TEST(Synth, FeaturesClusterByBlock) {
  const auto d = generate(small());
  const auto& f = *d.graph.features(NodeType::Gene);
  EXPECT_EQ(f.cols, 16u);
  auto dist = [&](std::size_t a, std::size_t b) {
    double s = 0;
    for (std::size_t k = 0; k < f.cols; ++k) s += (f.row(a)[k] - f.row(b)[k]) * (f.row(a)[k] - f.row(b)[k]);
    return s;
  };
  EXPECT_LT(dist(0, 4), dist(0, 1));
}

TEST(Synth, ConfigValidation) {
  auto bad = small();
  bad.p_in = 1.5;
  EXPECT_THROW(bad.validate(), Error);
  auto empty = small();
  empty.n_diseases = 0;
  try {
    generate(empty);
    FAIL();
  } catch (const Error& e) {
    EXPECT_TRUE(e.code() == ErrorCode::DegenerateConfig || e.code() == ErrorCode::InvalidConfig);
  }
}

TEST(Synth, SharedGoBaseline) {
  HeteroGraph g;
  auto g0 = g.add_node(NodeType::Gene, "g0");
  auto g1 = g.add_node(NodeType::Gene, "g1");
  auto g2 = g.add_node(NodeType::Gene, "g2");
  auto d0 = g.add_node(NodeType::Disease, "d0");
  auto a = g.add_node(NodeType::GoTerm, "a");
  auto b = g.add_node(NodeType::GoTerm, "b");
  g.add_edge(g0, a, RelationType::GeneGo);
  g.add_edge(g0, b, RelationType::GeneGo);
  g.add_edge(g1, a, RelationType::GeneGo);
  g.add_edge(g1, b, RelationType::GeneGo);
  g.add_edge(g2, b, RelationType::GeneGo);
  g.add_edge(g1, d0, RelationType::GeneDisease);
  g.add_edge(g2, d0, RelationType::GeneDisease);
  g.freeze();
  const DiseaseGenePair pairs[] = {{0, 0}};
  // g0 shares {a,b} with g1 and {b} with g2.
  EXPECT_EQ(shared_go_scores(g, pairs), std::vector<double>{3.0});
}

TEST(DataDir, WriteLoadRoundTrip) {
  TempDir dir("datadir");
  const auto d = generate(small());
  write_dataset(d, dir.path());
  const auto loaded = load_data_dir(dir.path(), 1);
  EXPECT_EQ(loaded.heldout, d.heldout);
  for (auto t : kNodeTypes) {
    EXPECT_EQ(loaded.graph.node_count(t), d.graph.node_count(t));
    EXPECT_EQ(*loaded.graph.features(t), *d.graph.features(t));
  }
  for (auto r : kRelations) EXPECT_EQ(loaded.graph.edge_count(r), d.graph.edge_count(r));
  EXPECT_EQ(gene_disease_pairs(loaded.graph), gene_disease_pairs(d.graph));

  TempDir again("datadir2");
  write_data_dir(loaded.graph, loaded.heldout, again.path());
  for (auto r : kStoredRelations)
    EXPECT_EQ(read_all(edge_file(again.path(), r)), read_all(edge_file(dir.path(), r)));
  EXPECT_EQ(load_data_dir(again.path(), 1).data_hash, loaded.data_hash);
}

TEST(DataDir, MissingFeaturesAreRandomized) {
  TempDir dir("nofeat");
  const auto d = generate(small());
  write_dataset(d, dir.path());
  std::filesystem::remove(feature_file(dir.path(), NodeType::Phenotype));
  const auto loaded = load_data_dir(dir.path(), 1);
  EXPECT_TRUE(loaded.report.randomized[index_of(NodeType::Phenotype)]);
  EXPECT_EQ(loaded.graph.features(NodeType::Phenotype)->cols, kDefaultRandomFeatureDim);
}

TEST(DataDir, BadInputs) {
  TempDir dir("bad");
  EXPECT_THROW(load_data_dir(dir / "absent", 1), Error);
  const auto d = generate(small());
  write_dataset(d, dir.path());
  {
    std::ofstream f(heldout_file(dir.path()), std::ios::app);
    f << "G0001\tNOPE\n";
  }
  try {
    load_data_dir(dir.path(), 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidNode);
  }
}

}  // namespace
}  // namespace comet
