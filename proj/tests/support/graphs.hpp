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
#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>

#include "comet/hetgraph.hpp"
#include "comet/rng.hpp"

namespace comet::testing {

struct RandomGraphSpec {
  std::size_t genes = 6;
  std::size_t diseases = 3;
  std::size_t go = 3;
  std::size_t pheno = 3;
  double density = 0.35;
  std::size_t feature_dim = 4;  // 0 leaves features unset
};

/// Erdos-Renyi per relation, seeded random features; frozen.
inline HeteroGraph random_graph(const RandomGraphSpec& spec, std::uint64_t seed) {
  HeteroGraph g;
  const std::size_t counts[] = {spec.genes, spec.diseases, spec.go, spec.pheno};
  const char* prefix[] = {"g", "d", "go", "hp"};
  for (auto t : kNodeTypes)
    for (std::size_t i = 0; i < counts[index_of(t)]; ++i)
      g.add_node(t, prefix[index_of(t)] + std::to_string(i));
  Rng rng(seed);
  std::bernoulli_distribution edge(spec.density);
  for (auto r : {RelationType::GeneGene, RelationType::GeneGo, RelationType::GenePheno,
                 RelationType::DiseaseDisease, RelationType::GeneDisease}) {
    const auto s = source_type(r), t = target_type(r);
    const bool same = s == t;
    for (std::uint32_t a = 0; a < counts[index_of(s)]; ++a)
      for (std::uint32_t b = same ? a + 1 : 0; b < counts[index_of(t)]; ++b)
        if (edge(rng)) g.add_edge({s, a}, {t, b}, r);
  }
  if (spec.feature_dim > 0)
    for (auto t : kNodeTypes)
      if (counts[index_of(t)] > 0) g.randomize_features(t, spec.feature_dim, seed ^ 0xFEA7ULL);
  g.freeze();
  return g;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("comet_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

}  // namespace comet::testing
