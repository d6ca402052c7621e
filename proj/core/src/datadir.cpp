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

#include "comet/datadir.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

#include "comet/error.hpp"
#include "comet/rng.hpp"

namespace comet {

namespace fs = std::filesystem;

namespace {

std::string read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void register_labels(HeteroGraph& graph, NodeType type, const std::string& text) {
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.starts_with('#')) continue;
    const auto tab = line.find('\t');
    const auto label = std::string_view(line).substr(0, tab);
    if (!label.empty()) graph.ensure_node(type, label);
  }
}

std::ofstream open_out(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  return out;
}

}  // namespace

fs::path edge_file(const fs::path& dir, RelationType rel) {
  return dir / "edges" / (std::string(file_stem(rel)) + ".tsv");
}

fs::path feature_file(const fs::path& dir, NodeType type) {
  return dir / "features" / (std::string(file_stem(type)) + ".tsv");
}

fs::path heldout_file(const fs::path& dir) { return dir / "splits" / "heldout.tsv"; }

std::uint64_t hash_file(const fs::path& path) {
  Fnv1a h;
  h.update(read_all(path));
  return h.digest();
}

LoadedData load_data_dir(const fs::path& dir, std::uint64_t feature_seed, std::size_t random_dim) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::IoError, "not a data directory: " + dir.string());
  LoadedData out;
  Fnv1a hash;
  auto mix = [&hash](const fs::path& rel, const std::string& bytes) {
    hash.update(rel.generic_string());
    hash.update(bytes);
  };

  for (auto t : kNodeTypes) {
    const auto path = feature_file(dir, t);
    if (!fs::exists(path)) continue;
    const auto text = read_all(path);
    mix(fs::relative(path, dir), text);
    register_labels(out.graph, t, text);
  }
  for (auto r : kStoredRelations) {
    const auto path = edge_file(dir, r);
    if (!fs::exists(path)) continue;
    mix(fs::relative(path, dir), read_all(path));
    out.report.edges[index_of(r)] = out.graph.ingest_edge_list(path, r);
  }
  if (out.graph.node_count(NodeType::Gene) == 0 || out.graph.node_count(NodeType::Disease) == 0)
    throw Error(ErrorCode::IoError, dir.string() + ": no gene or disease nodes found");
  for (auto t : kNodeTypes) {
    const auto path = feature_file(dir, t);
    if (fs::exists(path)) {
      out.report.features[index_of(t)] = out.graph.load_node_features(path, t, feature_seed);
    } else if (out.graph.node_count(t) > 0) {
      out.graph.randomize_features(t, random_dim, feature_seed);
      out.report.randomized[index_of(t)] = true;
    }
  }

  const auto held = heldout_file(dir);
  if (fs::exists(held)) {
    const auto text = read_all(held);
    mix(fs::relative(held, dir), text);
    std::istringstream is(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line.starts_with('#')) continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos)
        throw Error(ErrorCode::FormatError, held.string() + ":" + std::to_string(line_no) + ": expected gene<TAB>disease");
      auto g = out.graph.find(NodeType::Gene, std::string_view(line).substr(0, tab));
      auto d = out.graph.find(NodeType::Disease, std::string_view(line).substr(tab + 1));
      if (!g || !d)
        throw Error(ErrorCode::InvalidNode, held.string() + ":" + std::to_string(line_no) + ": unknown label");
      out.heldout.push_back({d->index, g->index});
    }
    out.report.heldout = out.heldout.size();
  }
  out.graph.freeze();
  out.data_hash = hash.digest();
  return out;
}

void write_data_dir(const HeteroGraph& graph, std::span<const DiseaseGenePair> heldout, const fs::path& dir) {
  for (auto r : kStoredRelations) {
    auto out = open_out(edge_file(dir, r));
    const auto src_type = source_type(r);
    const auto dst_type = target_type(r);
    const bool same = src_type == dst_type;
    for (std::uint32_t s = 0; s < graph.node_count(src_type); ++s)
      for (auto d : graph.neighbors({src_type, s}, r)) {
        if (same && d < s) continue;  // undirected relation: write each pair once
        out << graph.label({src_type, s}) << '\t' << graph.label({dst_type, d}) << '\n';
      }
  }
  for (auto t : kNodeTypes) {
    const auto* f = graph.features(t);
    if (!f) continue;
    auto out = open_out(feature_file(dir, t));
    char buf[32];
    for (std::uint32_t i = 0; i < f->rows; ++i) {
      out << graph.label({t, i});
      for (double v : f->row(i)) {
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
        out << '\t' << std::string_view(buf, static_cast<std::size_t>(ptr - buf));
      }
      out << '\n';
    }
  }
  auto out = open_out(heldout_file(dir));
  for (const auto& p : heldout)
    out << graph.label({NodeType::Gene, p.gene}) << '\t' << graph.label({NodeType::Disease, p.disease}) << '\n';
}

}  // namespace comet
