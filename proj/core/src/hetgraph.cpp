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

#include "comet/hetgraph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <random>

#include "comet/error.hpp"
#include "comet/rng.hpp"

namespace comet {

namespace {

constexpr std::array<std::string_view, kNumNodeTypes> kNodeNames = {"Gene", "Disease", "GoTerm",
                                                                    "Phenotype"};
constexpr std::array<std::string_view, kNumNodeTypes> kNodeStems = {"gene", "disease", "go",
                                                                    "phenotype"};
constexpr std::array<std::string_view, kNumRelations> kRelNames = {
    "GeneGene",       "GeneGo",      "GoGene",     "GenePheno",
    "PhenoGene",      "DiseaseDisease", "GeneDisease", "DiseaseGene"};
constexpr std::array<std::string_view, kNumRelations> kRelStems = {
    "gene_gene",       "gene_go",      "go_gene",      "gene_phenotype",
    "phenotype_gene",  "disease_disease", "gene_disease", "disease_gene"};

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view chomp(std::string_view line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.remove_suffix(1);
  return line;
}

}  // namespace

std::string_view name(NodeType t) noexcept { return kNodeNames[index_of(t)]; }
std::string_view name(RelationType r) noexcept { return kRelNames[index_of(r)]; }
std::string_view file_stem(NodeType t) noexcept { return kNodeStems[index_of(t)]; }
std::string_view file_stem(RelationType r) noexcept { return kRelStems[index_of(r)]; }

std::optional<NodeType> parse_node_type(std::string_view s) noexcept {
  for (auto t : kNodeTypes)
    if (s == name(t) || s == file_stem(t)) return t;
  return std::nullopt;
}

std::optional<RelationType> parse_relation(std::string_view s) noexcept {
  for (auto r : kRelations)
    if (s == name(r) || s == file_stem(r)) return r;
  return std::nullopt;
}

void fill_random_feature_row(std::span<double> row, std::uint64_t seed, NodeType type,
                             std::uint32_t index) {
  if (row.empty()) return;
  const double a = std::sqrt(6.0 / static_cast<double>(row.size()));
  auto rng = make_rng(seed, {0xFEA7ULL, index_of(type), index});
  std::uniform_real_distribution<double> dist(-a, a);
  for (auto& v : row) v = dist(rng);
}

void HeteroGraph::check_node(NodeId node) const {
  if (node.index >= node_count(node.type))
    throw Error(ErrorCode::InvalidNode, std::string(name(node.type)) + " index " +
                                            std::to_string(node.index) + " out of range");
}

void HeteroGraph::check_mutable() const {
  if (frozen_) throw Error(ErrorCode::GraphFrozen, "graph is frozen");
}

NodeId HeteroGraph::add_node(NodeType type, std::string_view label) {
  check_mutable();
  auto& idx = index_[index_of(type)];
  std::string key(label);
  if (idx.contains(key))
    throw Error(ErrorCode::DuplicateNode, std::string(name(type)) + " '" + key + "'");
  auto& labels = labels_[index_of(type)];
  const auto id = static_cast<std::uint32_t>(labels.size());
  idx.emplace(key, id);
  labels.push_back(std::move(key));
  for (auto r : kRelations)
    if (source_type(r) == type) lists_[index_of(r)].emplace_back();
  return {type, id};
}

NodeId HeteroGraph::ensure_node(NodeType type, std::string_view label, bool* created) {
  if (auto found = find(type, label)) {
    if (created) *created = false;
    return *found;
  }
  if (created) *created = true;
  return add_node(type, label);
}

std::optional<NodeId> HeteroGraph::find(NodeType type, std::string_view label) const {
  const auto& idx = index_[index_of(type)];
  auto it = idx.find(std::string(label));
  if (it == idx.end()) return std::nullopt;
  return NodeId{type, it->second};
}

bool HeteroGraph::insert_sorted(RelationType rel, std::uint32_t src, std::uint32_t dst) {
  auto& list = lists_[index_of(rel)][src];
  auto it = std::lower_bound(list.begin(), list.end(), dst);
  if (it != list.end() && *it == dst) return false;
  list.insert(it, dst);
  ++edge_counts_[index_of(rel)];
  return true;
}

bool HeteroGraph::add_edge(NodeId src, NodeId dst, RelationType rel) {
  check_mutable();
  if (src.type != source_type(rel) || dst.type != target_type(rel))
    throw Error(ErrorCode::RelationTypeMismatch,
                std::string(name(rel)) + " expects " + std::string(name(source_type(rel))) +
                    " -> " + std::string(name(target_type(rel))) + ", got " +
                    std::string(name(src.type)) + " -> " + std::string(name(dst.type)));
  check_node(src);
  check_node(dst);
  const bool added = insert_sorted(rel, src.index, dst.index);
  const auto rev = reverse(rel);
  if (rev != rel || src.index != dst.index) insert_sorted(rev, dst.index, src.index);
  return added;
}

IngestReport HeteroGraph::ingest_edge_list(const std::filesystem::path& path, RelationType rel,
                                           const EdgeListFormat& format) {
  check_mutable();
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());

  IngestReport report;
  const std::size_t needed = std::max(format.src_column, format.dst_column) + 1;
  bool header_pending = format.has_header;
  std::string raw;
  while (std::getline(in, raw)) {
    auto line = chomp(raw);
    if (line.empty()) continue;
    if (!format.comment_prefix.empty() && line.starts_with(format.comment_prefix)) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    auto cols = split(line, format.separator);
    if (cols.size() != 2 || needed > 2 || cols[format.src_column].empty() ||
        cols[format.dst_column].empty()) {
      ++report.lines_skipped;
      continue;
    }
    const auto src_label = cols[format.src_column];
    const auto dst_label = cols[format.dst_column];
    if (source_type(rel) == target_type(rel) && src_label == dst_label) {
      ++report.self_loops_dropped;
      continue;
    }
    bool created = false;
    auto src = ensure_node(source_type(rel), src_label, &created);
    report.nodes_added += created ? 1 : 0;
    auto dst = ensure_node(target_type(rel), dst_label, &created);
    report.nodes_added += created ? 1 : 0;
    if (add_edge(src, dst, rel)) ++report.edges_added;
  }
  return report;
}

FeatureLoadReport HeteroGraph::load_node_features(const std::filesystem::path& path,
                                                  NodeType type, std::uint64_t seed) {
  check_mutable();
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());

  FeatureLoadReport report;
  const std::size_t n = node_count(type);
  std::vector<double> data;
  std::vector<bool> seen(n, false);
  std::string raw;
  std::size_t line_no = 0;
  std::vector<double> values;
  while (std::getline(in, raw)) {
    ++line_no;
    auto line = chomp(raw);
    if (line.empty() || line.starts_with('#')) continue;
    auto cols = split(line, '\t');
    values.clear();
    for (std::size_t c = 1; c < cols.size(); ++c) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(cols[c].data(), cols[c].data() + cols[c].size(), v);
      if (ec != std::errc() || ptr != cols[c].data() + cols[c].size())
        throw Error(ErrorCode::FormatError, path.string() + ":" + std::to_string(line_no) +
                                                ": bad value '" + std::string(cols[c]) + "'");
      values.push_back(v);
    }
    if (report.dim == 0) {
      if (values.empty())
        throw Error(ErrorCode::FeatureDimMismatch, path.string() + ": empty feature row");
      report.dim = values.size();
      data.assign(n * report.dim, 0.0);
    } else if (values.size() != report.dim) {
      throw Error(ErrorCode::FeatureDimMismatch,
                  path.string() + ":" + std::to_string(line_no) + ": dimension " +
                      std::to_string(values.size()) + " != " + std::to_string(report.dim));
    }
    auto node = find(type, cols[0]);
    if (!node) {
      ++report.unknown_labels;
      continue;
    }
    std::copy(values.begin(), values.end(), data.begin() + node->index * report.dim);
    if (!seen[node->index]) ++report.rows_loaded;
    seen[node->index] = true;
  }
  if (report.dim == 0) throw Error(ErrorCode::FeatureDimMismatch, path.string() + ": no rows");
  if (report.unknown_labels > 0)
    std::clog << "warning: " << path.string() << ": " << report.unknown_labels
              << " labels not present in the graph\n";

  FeatureMatrix fm{n, report.dim, std::move(data)};
  for (std::uint32_t i = 0; i < n; ++i) {
    if (seen[i]) continue;
    fill_random_feature_row(fm.row(i), seed, type, i);
    ++report.rows_filled;
  }
  features_[index_of(type)] = std::move(fm);
  return report;
}

void HeteroGraph::set_features(NodeType type, FeatureMatrix features) {
  check_mutable();
  if (features.rows != node_count(type) || features.data.size() != features.rows * features.cols)
    throw Error(ErrorCode::FeatureDimMismatch,
                std::string(name(type)) + ": feature rows " + std::to_string(features.rows) +
                    " != node count " + std::to_string(node_count(type)));
  features_[index_of(type)] = std::move(features);
}

void HeteroGraph::randomize_features(NodeType type, std::size_t dim, std::uint64_t seed) {
  check_mutable();
  const std::size_t n = node_count(type);
  FeatureMatrix fm{n, dim, std::vector<double>(n * dim)};
  for (std::uint32_t i = 0; i < n; ++i) fill_random_feature_row(fm.row(i), seed, type, i);
  features_[index_of(type)] = std::move(fm);
}

std::span<const std::uint32_t> HeteroGraph::neighbors(NodeId node, RelationType rel) const {
  if (node.type != source_type(rel))
    throw Error(ErrorCode::RelationTypeMismatch,
                std::string(name(node.type)) + " is not the source of " + std::string(name(rel)));
  check_node(node);
  if (frozen_) {
    const auto& c = csr_[index_of(rel)];
    return {c.targets.data() + c.offsets[node.index],
            c.offsets[node.index + 1] - c.offsets[node.index]};
  }
  const auto& list = lists_[index_of(rel)][node.index];
  return {list.data(), list.size()};
}

bool HeteroGraph::has_edge(NodeId src, NodeId dst, RelationType rel) const {
  auto nb = neighbors(src, rel);
  return dst.type == target_type(rel) && std::binary_search(nb.begin(), nb.end(), dst.index);
}

std::size_t HeteroGraph::edge_count(RelationType rel) const noexcept {
  return edge_counts_[index_of(rel)];
}

const std::string& HeteroGraph::label(NodeId node) const {
  check_node(node);
  return labels_[index_of(node.type)][node.index];
}

const FeatureMatrix* HeteroGraph::features(NodeType type) const noexcept {
  const auto& f = features_[index_of(type)];
  return f ? &*f : nullptr;
}

GraphStats HeteroGraph::stats() const {
  GraphStats s;
  for (auto t : kNodeTypes) s.nodes[index_of(t)] = node_count(t);
  for (auto r : kRelations) s.edges[index_of(r)] = edge_count(r);
  return s;
}

void HeteroGraph::freeze() {
  if (frozen_) return;
  for (auto r : kRelations) {
    auto& lists = lists_[index_of(r)];
    auto& c = csr_[index_of(r)];
    c.offsets.assign(lists.size() + 1, 0);
    c.targets.clear();
    c.targets.reserve(edge_counts_[index_of(r)]);
    for (std::size_t i = 0; i < lists.size(); ++i) {
      c.targets.insert(c.targets.end(), lists[i].begin(), lists[i].end());
      c.offsets[i + 1] = c.targets.size();
    }
    lists = {};
  }
  frozen_ = true;
}

HeteroGraph HeteroGraph::thawed_copy() const {
  HeteroGraph g;
  g.labels_ = labels_;
  g.index_ = index_;
  g.features_ = features_;
  g.edge_counts_ = edge_counts_;
  for (auto r : kRelations) {
    const auto n = node_count(source_type(r));
    auto& out = g.lists_[index_of(r)];
    out.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      auto nb = neighbors({source_type(r), i}, r);
      out[i].assign(nb.begin(), nb.end());
    }
  }
  return g;
}

HeteroGraph HeteroGraph::without_edges(RelationType rel,
                                       std::span<const std::pair<NodeId, NodeId>> edges) const {
  HeteroGraph g = thawed_copy();
  const auto rev = reverse(rel);
  auto erase = [&g](RelationType r, std::uint32_t s, std::uint32_t d) {
    auto& list = g.lists_[index_of(r)][s];
    auto it = std::lower_bound(list.begin(), list.end(), d);
    if (it != list.end() && *it == d) {
      list.erase(it);
      --g.edge_counts_[index_of(r)];
    }
  };
  for (const auto& [src, dst] : edges) {
    if (src.type != source_type(rel) || dst.type != target_type(rel))
      throw Error(ErrorCode::RelationTypeMismatch, "edge endpoints do not match relation");
    check_node(src);
    check_node(dst);
    erase(rel, src.index, dst.index);
    if (rev != rel || src.index != dst.index) erase(rev, dst.index, src.index);
  }
  g.freeze();
  return g;
}

}  // namespace comet
