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
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "comet/autodiff/ops.hpp"
#include "comet/autodiff/params.hpp"
#include "comet/hetgraph.hpp"
#include "comet/metapath.hpp"

namespace comet {

enum class EncoderMode { Transformer, Average, MaxPool };
enum class Activation { Relu, Identity };

std::string_view name(EncoderMode m) noexcept;
std::string_view name(Activation a) noexcept;
std::optional<EncoderMode> parse_encoder(std::string_view s) noexcept;
std::optional<Activation> parse_activation(std::string_view s) noexcept;

struct ModelConfig {
  std::size_t hidden_dim = 64;
  std::size_t heads = 4;
  std::size_t layers = 1;
  std::size_t ffn_dim = 128;
  double dropout = 0.1;
  double leaky_slope = 0.2;
  std::size_t instance_cap = kDefaultInstanceCap;
  // sigma in the intra-metapath aggregation. The network has a single
  // aggregation layer, which is the final one and uses `final_activation`;
  // `activation` applies to any non-final aggregation.
  Activation activation = Activation::Relu;
  Activation final_activation = Activation::Identity;
  EncoderMode encoder = EncoderMode::Transformer;
  bool include_reverse_gd = false;
  std::vector<SchemaId> dropped_schemas;
  /// Skips layer normalization so degenerate weights give closed-form outputs.
  bool test_mode = false;
  std::uint64_t init_seed = 42;
  /// Input feature width per node type (0 when the type has no features).
  std::array<std::size_t, kNumNodeTypes> input_dims{};

  void validate() const;
  SchemaOptions schema_options() const;

  /// Stable `key=value` lines, one per field, in declaration order.
  std::string to_kv() const;
  static ModelConfig from_kv(const std::string& text);
  bool operator==(const ModelConfig&) const = default;
};

/// Per target type: instance batches with node indices translated into rows
/// of the concatenated projection table.
struct ForwardPlan {
  struct Schema {
    SchemaId id = SchemaId::GG;
    std::size_t length = 0;
    std::vector<std::uint32_t> rows;     // count * length
    std::vector<std::uint32_t> segment;  // target of each instance
    std::size_t count() const noexcept { return segment.size(); }
  };
  struct Target {
    NodeType type = NodeType::Gene;
    std::vector<std::uint32_t> rows;  // projection row of each target node
    std::vector<Schema> schemas;
  };
  std::array<std::size_t, kNumNodeTypes> offsets{};
  std::size_t total_nodes = 0;
  std::vector<Target> targets;  // Gene then Disease
};

ForwardPlan build_forward_plan(const HeteroGraph& graph, const ModelConfig& config,
                               std::uint64_t seed);

struct IntraResult {
  ad::Tensor z;                        // [T, d]
  ad::Tensor alpha;                    // [N + T, H]; rows N.. are self terms
  std::vector<std::uint32_t> segment;  // target of each alpha row
};

struct InterResult {
  ad::Tensor z;     // [T, d]
  ad::Tensor beta;  // [K]
};

struct AttentionTrace {
  NodeType target = NodeType::Gene;
  SchemaId schema = SchemaId::GG;
  ad::Tensor alpha;
  std::vector<std::uint32_t> segment;
};

struct SemanticTrace {
  NodeType target = NodeType::Gene;
  std::vector<SchemaId> schemas;
  ad::Tensor beta;
};

/// Final representations for every gene and disease node.
struct NodeEmbeddings {
  ad::Tensor genes;     // [n_genes, d]
  ad::Tensor diseases;  // [n_diseases, d]
};

struct ForwardResult {
  NodeEmbeddings embeddings;
  std::vector<AttentionTrace> alphas;
  std::vector<SemanticTrace> betas;
};

struct ForwardOptions {
  bool training = false;       // enables dropout
  std::uint64_t dropout_seed = 0;
};

class CometModel {
 public:
  /// Parameters are initialized from `config.init_seed`.
  explicit CometModel(ModelConfig config);
  /// Convenience: takes input widths from the graph's feature matrices.
  CometModel(ModelConfig config, const HeteroGraph& graph);

  const ModelConfig& config() const noexcept { return config_; }
  ad::ParameterStore& params() noexcept { return params_; }
  const ad::ParameterStore& params() const noexcept { return params_; }

  /// h' = h W_type + b for every node of `type` -> [n, d].
  ad::Tensor project(const HeteroGraph& graph, NodeType type) const;
  ad::Tensor project_node(const HeteroGraph& graph, NodeId node) const;

  /// Instance encoder over token rows [N, L, d] -> [N, d]. Tokens are the
  /// projected node vectors; positions are added inside for the transformer.
  ad::Tensor encode(const ad::Tensor& tokens, Rng* dropout_rng = nullptr) const;
  /// Encodes a single instance given projected vectors [L, d] -> [d].
  ad::Tensor encode_instance(const MetapathInstance& instance, const ad::Tensor& projected) const;

  /// Multi-head attention over each target's instances plus itself.
  /// instances [N, d] with `segment` mapping each to a target row of
  /// targets [T, d].
  IntraResult intra_aggregate(SchemaId schema, const ad::Tensor& instances,
                              std::span<const std::uint32_t> segment, const ad::Tensor& targets,
                              Activation sigma) const;

  /// Semantic attention across schemas for one target type.
  InterResult inter_aggregate(std::span<const ad::Tensor> per_schema) const;

  ForwardResult forward(const HeteroGraph& graph, const ForwardPlan& plan,
                        const ForwardOptions& options = {}) const;

 private:
  void init_parameters();
  ad::Tensor transformer(const ad::Tensor& tokens, Rng* dropout_rng) const;
  ad::Tensor& param(const std::string& name) const;

  ModelConfig config_;
  mutable ad::ParameterStore params_;
  ad::Tensor head_expand_;  // [H, d] block indicator
};

/// sigma(z_d . z_g).
double score_pair(std::span<const double> z_d, std::span<const double> z_g);

/// Dot products of selected rows -> [P].
ad::Tensor pair_logits(const NodeEmbeddings& emb, std::span<const DiseaseGenePair> pairs);

/// -sum log sigma(pos) - sum log sigma(-neg) over (disease, gene) index pairs.
ad::Tensor link_loss(const NodeEmbeddings& emb,
                     std::span<const DiseaseGenePair> positives,
                     std::span<const DiseaseGenePair> negatives);

/// Same loss on precomputed logits.
ad::Tensor link_loss_from_logits(const ad::Tensor& positive_logits, const ad::Tensor& negative_logits);

}  // namespace comet
