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

#include "comet/synthbench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <string>

#include "comet/datadir.hpp"
#include "comet/error.hpp"
#include "comet/rng.hpp"

namespace comet {

namespace {

std::string make_label(NodeType t, std::size_t i) {
  char buf[32];
  switch (t) {
    case NodeType::Gene: std::snprintf(buf, sizeof buf, "G%04zu", i + 1); break;
    case NodeType::Disease: std::snprintf(buf, sizeof buf, "D%03zu", i + 1); break;
    case NodeType::GoTerm: std::snprintf(buf, sizeof buf, "GO:%07zu", i + 1); break;
    case NodeType::Phenotype: std::snprintf(buf, sizeof buf, "HP:%07zu", i + 1); break;
  }
  return buf;
}

// Picks `count` distinct members of `pool` for a gene in `block`: each pick
// comes from the gene's own block with probability `own`, falling back to
// the other side when one side is used up.
std::vector<std::uint32_t> pick_annotations(Rng& rng, std::size_t pool, std::size_t blocks,
                                            std::size_t block, std::size_t count, double own) {
  std::vector<std::uint32_t> in, out;
  for (std::uint32_t i = 0; i < pool; ++i) (i % blocks == block ? in : out).push_back(i);
  std::vector<std::uint32_t> chosen;
  std::bernoulli_distribution side(own);
  count = std::min(count, pool);
  while (chosen.size() < count) {
    bool use_in = side(rng);
    if (use_in && in.empty()) use_in = false;
    if (!use_in && out.empty()) use_in = true;
    auto& from = use_in ? in : out;
    std::uniform_int_distribution<std::size_t> pick(0, from.size() - 1);
    const auto k = pick(rng);
    chosen.push_back(from[k]);
    from.erase(from.begin() + static_cast<std::ptrdiff_t>(k));
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

}  // namespace

void SynthConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob(p_in) || !prob(p_out)) fail("edge probabilities must lie in [0, 1]");
  if (!(p_in > p_out)) fail("p_in must exceed p_out");
  if (n_blocks == 0) fail("n_blocks must be >= 1");
  if (feature_dim == 0) fail("feature_dim must be >= 1");
  if (!(feature_noise >= 0.0) || !(centroid_scale >= 0.0)) fail("noise scales must be nonnegative");
  if (!(heldout_fraction > 0.0 && heldout_fraction < 1.0)) fail("heldout_fraction must lie in (0, 1)");
}

SynthDataset generate(const SynthConfig& c) {
  c.validate();
  if (c.n_genes == 0 || c.n_diseases == 0)
    throw Error(ErrorCode::DegenerateConfig, "no same-block gene-disease pairs to plant");

  SynthDataset data;
  auto& g = data.graph;
  const std::array<std::size_t, kNumNodeTypes> counts = {c.n_genes, c.n_diseases, c.n_go, c.n_pheno};
  for (auto t : kNodeTypes) {
    auto& blocks = data.blocks[index_of(t)];
    for (std::size_t i = 0; i < counts[index_of(t)]; ++i) {
      g.add_node(t, make_label(t, i));
      blocks.push_back(static_cast<std::uint32_t>(i % c.n_blocks));
    }
  }
  const auto& gb = data.blocks[index_of(NodeType::Gene)];
  const auto& db = data.blocks[index_of(NodeType::Disease)];

  Rng rng(derive_seed(c.seed, {0x5E7D0ULL}));

  std::vector<double> centroids(c.n_blocks * c.feature_dim);
  std::normal_distribution<double> centroid(0.0, 1.0);
  for (auto& v : centroids) v = c.centroid_scale * centroid(rng);

  std::vector<DiseaseGenePair> same_block;
  for (std::uint32_t d = 0; d < c.n_diseases; ++d)
    for (std::uint32_t gi = 0; gi < c.n_genes; ++gi)
      if (db[d] == gb[gi]) same_block.push_back({d, gi});
  if (same_block.empty()) throw Error(ErrorCode::DegenerateConfig, "no same-block gene-disease pairs");
  const auto held = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(c.heldout_fraction * static_cast<double>(same_block.size()))));
  for (std::size_t i = 0; i < held; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, same_block.size() - 1);
    std::swap(same_block[i], same_block[pick(rng)]);
  }
  data.heldout.assign(same_block.begin(), same_block.begin() + static_cast<std::ptrdiff_t>(held));
  std::sort(data.heldout.begin(), data.heldout.end());

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto draw = [&](bool same) { return unit(rng) < (same ? c.p_in : c.p_out); };

  for (std::uint32_t i = 0; i < c.n_genes; ++i)
    for (std::uint32_t j = i + 1; j < c.n_genes; ++j)
      if (draw(gb[i] == gb[j])) g.add_edge({NodeType::Gene, i}, {NodeType::Gene, j}, RelationType::GeneGene);
  for (std::uint32_t d = 0; d < c.n_diseases; ++d)
    for (std::uint32_t gi = 0; gi < c.n_genes; ++gi) {
      const bool same = db[d] == gb[gi];
      const bool flip = draw(same);
      if (same && std::binary_search(data.heldout.begin(), data.heldout.end(), DiseaseGenePair{d, gi})) continue;
      if (flip) g.add_edge({NodeType::Gene, gi}, {NodeType::Disease, d}, RelationType::GeneDisease);
    }
  for (std::uint32_t i = 0; i < c.n_diseases; ++i)
    for (std::uint32_t j = i + 1; j < c.n_diseases; ++j)
      if (draw(db[i] == db[j]))
        g.add_edge({NodeType::Disease, i}, {NodeType::Disease, j}, RelationType::DiseaseDisease);

  const double own = c.p_in / (c.p_in + c.p_out);
  for (std::uint32_t gi = 0; gi < c.n_genes; ++gi) {
    for (auto t : pick_annotations(rng, c.n_go, c.n_blocks, gb[gi], c.annotations, own))
      g.add_edge({NodeType::Gene, gi}, {NodeType::GoTerm, t}, RelationType::GeneGo);
    for (auto t : pick_annotations(rng, c.n_pheno, c.n_blocks, gb[gi], c.annotations, own))
      g.add_edge({NodeType::Gene, gi}, {NodeType::Phenotype, t}, RelationType::GenePheno);
  }

  std::normal_distribution<double> noise(0.0, 1.0);
  for (auto t : kNodeTypes) {
    const auto n = counts[index_of(t)];
    if (n == 0) continue;
    FeatureMatrix fm{n, c.feature_dim, std::vector<double>(n * c.feature_dim)};
    for (std::size_t i = 0; i < n; ++i) {
      const double* centre = centroids.data() + data.blocks[index_of(t)][i] * c.feature_dim;
      auto row = fm.row(i);
      for (std::size_t k = 0; k < c.feature_dim; ++k) row[k] = centre[k] + c.feature_noise * noise(rng);
    }
    g.set_features(t, std::move(fm));
  }
  g.freeze();
  return data;
}

void write_dataset(const SynthDataset& data, const std::filesystem::path& dir) {
  write_data_dir(data.graph, data.heldout, dir);
  std::ofstream out(dir / "blocks.tsv", std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + (dir / "blocks.tsv").string());
  for (auto t : kNodeTypes) {
    const auto& blocks = data.blocks[index_of(t)];
    for (std::uint32_t i = 0; i < blocks.size(); ++i)
      out << file_stem(t) << '\t' << data.graph.label({t, i}) << '\t' << blocks[i] << '\n';
  }
}

std::vector<double> shared_go_scores(const HeteroGraph& graph, std::span<const DiseaseGenePair> pairs) {
  std::vector<double> scores;
  scores.reserve(pairs.size());
  for (const auto& p : pairs) {
    const auto mine = graph.neighbors({NodeType::Gene, p.gene}, RelationType::GeneGo);
    double s = 0.0;
    for (auto other : graph.neighbors({NodeType::Disease, p.disease}, RelationType::DiseaseGene)) {
      const auto theirs = graph.neighbors({NodeType::Gene, other}, RelationType::GeneGo);
      std::size_t i = 0, j = 0;
      while (i < mine.size() && j < theirs.size()) {
        if (mine[i] == theirs[j]) {
          ++s;
          ++i;
          ++j;
        } else if (mine[i] < theirs[j]) {
          ++i;
        } else {
          ++j;
        }
      }
    }
    scores.push_back(s);
  }
  return scores;
}

}  // namespace comet
