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

#include "comet/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "comet/error.hpp"
#include "comet/rng.hpp"

namespace comet {

namespace ops = ad;
using ad::Tensor;

std::string_view name(EncoderMode m) noexcept {
  switch (m) {
    case EncoderMode::Transformer: return "transformer";
    case EncoderMode::Average: return "average";
    case EncoderMode::MaxPool: return "maxpool";
  }
  return "transformer";
}

std::string_view name(Activation a) noexcept { return a == Activation::Relu ? "relu" : "identity"; }

std::optional<EncoderMode> parse_encoder(std::string_view s) noexcept {
  for (auto m : {EncoderMode::Transformer, EncoderMode::Average, EncoderMode::MaxPool})
    if (s == name(m)) return m;
  return std::nullopt;
}

std::optional<Activation> parse_activation(std::string_view s) noexcept {
  if (s == "relu") return Activation::Relu;
  if (s == "identity") return Activation::Identity;
  return std::nullopt;
}

// ---------------------------------------------------------------- config

void ModelConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
  if (hidden_dim == 0 || heads == 0 || ffn_dim == 0) fail("dimensions must be positive");
  if (hidden_dim % heads != 0) fail("hidden_dim must be divisible by heads");
  if (encoder == EncoderMode::Transformer && layers == 0) fail("transformer needs >= 1 layer");
  if (dropout < 0.0 || dropout >= 1.0) fail("dropout must be in [0, 1)");
  if (instance_cap == 0) fail("instance_cap must be >= 1");
  for (auto t : {NodeType::Gene, NodeType::Disease})
    if (schemas_for_target(t, schema_options()).empty())
      fail(std::string("no metapath schema left for ") + std::string(name(t)) + " targets");
}

SchemaOptions ModelConfig::schema_options() const { return {include_reverse_gd, dropped_schemas}; }

namespace {

std::string fmt_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

template <typename T>
T parse_number(std::string_view key, std::string_view v) {
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw Error(ErrorCode::InvalidConfig, "bad value for " + std::string(key) + ": '" + std::string(v) + "'");
  return out;
}

std::vector<std::string_view> split_csv(std::string_view v) {
  std::vector<std::string_view> out;
  while (!v.empty()) {
    auto pos = v.find(',');
    out.push_back(v.substr(0, pos));
    if (pos == std::string_view::npos) break;
    v.remove_prefix(pos + 1);
  }
  return out;
}

}  // namespace

std::string ModelConfig::to_kv() const {
  std::ostringstream os;
  os << "hidden_dim=" << hidden_dim << "\n"
     << "heads=" << heads << "\n"
     << "layers=" << layers << "\n"
     << "ffn_dim=" << ffn_dim << "\n"
     << "dropout=" << fmt_double(dropout) << "\n"
     << "leaky_slope=" << fmt_double(leaky_slope) << "\n"
     << "instance_cap=" << instance_cap << "\n"
     << "activation=" << name(activation) << "\n"
     << "final_activation=" << name(final_activation) << "\n"
     << "encoder=" << name(encoder) << "\n"
     << "include_reverse_gd=" << (include_reverse_gd ? 1 : 0) << "\n"
     << "dropped_schemas=";
  for (std::size_t i = 0; i < dropped_schemas.size(); ++i)
    os << (i ? "," : "") << name(dropped_schemas[i]);
  os << "\n"
     << "test_mode=" << (test_mode ? 1 : 0) << "\n"
     << "init_seed=" << init_seed << "\n"
     << "input_dims=";
  for (std::size_t i = 0; i < kNumNodeTypes; ++i) os << (i ? "," : "") << input_dims[i];
  os << "\n";
  return os.str();
}

ModelConfig ModelConfig::from_kv(const std::string& text) {
  ModelConfig c;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::InvalidConfig, "expected key=value: '" + line + "'");
    const std::string_view key(line.data(), eq);
    const std::string_view v(line.data() + eq + 1, line.size() - eq - 1);
    if (key == "hidden_dim") c.hidden_dim = parse_number<std::size_t>(key, v);
    else if (key == "heads") c.heads = parse_number<std::size_t>(key, v);
    else if (key == "layers") c.layers = parse_number<std::size_t>(key, v);
    else if (key == "ffn_dim") c.ffn_dim = parse_number<std::size_t>(key, v);
    else if (key == "dropout") c.dropout = parse_number<double>(key, v);
    else if (key == "leaky_slope") c.leaky_slope = parse_number<double>(key, v);
    else if (key == "instance_cap") c.instance_cap = parse_number<std::size_t>(key, v);
    else if (key == "activation" || key == "final_activation") {
      auto a = parse_activation(v);
      if (!a) throw Error(ErrorCode::InvalidConfig, "unknown activation '" + std::string(v) + "'");
      (key == "activation" ? c.activation : c.final_activation) = *a;
    } else if (key == "encoder") {
      auto m = parse_encoder(v);
      if (!m) throw Error(ErrorCode::InvalidConfig, "unknown encoder '" + std::string(v) + "'");
      c.encoder = *m;
    } else if (key == "include_reverse_gd") c.include_reverse_gd = parse_number<int>(key, v) != 0;
    else if (key == "dropped_schemas") {
      c.dropped_schemas.clear();
      for (auto s : split_csv(v)) {
        auto id = parse_schema(s);
        if (!id) throw Error(ErrorCode::InvalidConfig, "unknown schema '" + std::string(s) + "'");
        c.dropped_schemas.push_back(*id);
      }
    } else if (key == "test_mode") c.test_mode = parse_number<int>(key, v) != 0;
    else if (key == "init_seed") c.init_seed = parse_number<std::uint64_t>(key, v);
    else if (key == "input_dims") {
      auto parts = split_csv(v);
      if (parts.size() != kNumNodeTypes) throw Error(ErrorCode::InvalidConfig, "input_dims needs 4 values");
      for (std::size_t i = 0; i < kNumNodeTypes; ++i) c.input_dims[i] = parse_number<std::size_t>(key, parts[i]);
    } else {
      throw Error(ErrorCode::InvalidConfig, "unknown model config key '" + std::string(key) + "'");
    }
  }
  return c;
}

// ---------------------------------------------------------------- plan

ForwardPlan build_forward_plan(const HeteroGraph& graph, const ModelConfig& config,
                               std::uint64_t seed) {
  ForwardPlan plan;
  for (auto t : kNodeTypes) {
    plan.offsets[index_of(t)] = plan.total_nodes;
    plan.total_nodes += graph.node_count(t);
  }
  for (auto t : {NodeType::Gene, NodeType::Disease}) {
    ForwardPlan::Target target{t, {}, {}};
    const auto n = graph.node_count(t);
    target.rows.resize(n);
    std::iota(target.rows.begin(), target.rows.end(),
              static_cast<std::uint32_t>(plan.offsets[index_of(t)]));
    auto instances =
        build_instance_plan(graph, t, config.schema_options(), config.instance_cap, seed);
    for (auto& batch : instances.batches) {
      const auto& s = schema(batch.schema);
      ForwardPlan::Schema entry{batch.schema, batch.length, std::move(batch.flat),
                                std::move(batch.segment)};
      for (std::size_t i = 0; i < entry.rows.size(); ++i)
        entry.rows[i] += static_cast<std::uint32_t>(plan.offsets[index_of(s.node_types[i % entry.length])]);
      target.schemas.push_back(std::move(entry));
    }
    plan.targets.push_back(std::move(target));
  }
  return plan;
}

// ---------------------------------------------------------------- model

namespace {

std::vector<double> xavier(std::size_t fan_in, std::size_t fan_out, std::size_t count,
                           std::uint64_t seed, const std::string& name) {
  Fnv1a h;
  h.update(name);
  auto rng = make_rng(seed, {h.digest()});
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-a, a);
  std::vector<double> out(count);
  for (auto& v : out) v = dist(rng);
  return out;
}

std::string layer_prefix(std::size_t l) { return "encoder.layer" + std::to_string(l) + "."; }

Tensor activate(const Tensor& x, Activation a) { return a == Activation::Relu ? ops::relu(x) : x; }

}  // namespace

CometModel::CometModel(ModelConfig config) : config_(std::move(config)) {
  config_.validate();
  init_parameters();
}

CometModel::CometModel(ModelConfig config, const HeteroGraph& graph) : config_(std::move(config)) {
  for (auto t : kNodeTypes) {
    const auto* f = graph.features(t);
    config_.input_dims[index_of(t)] = f ? f->cols : 0;
  }
  config_.validate();
  init_parameters();
}

void CometModel::init_parameters() {
  const std::size_t d = config_.hidden_dim;
  const std::size_t h = config_.heads;
  const auto seed = config_.init_seed;
  auto matrix = [&](const std::string& name, std::size_t rows, std::size_t cols) {
    params_.add(name, {rows, cols}, xavier(rows, cols, rows * cols, seed, name));
  };
  auto vec = [&](const std::string& name, std::size_t n, double v) {
    params_.add(name, {n}, std::vector<double>(n, v));
  };

  for (auto t : kNodeTypes) {
    const auto din = config_.input_dims[index_of(t)];
    if (din == 0) continue;
    const std::string pre = "proj." + std::string(file_stem(t)) + ".";
    matrix(pre + "W", din, d);
    vec(pre + "b", d, 0.0);
  }
  if (config_.encoder == EncoderMode::Transformer) {
    matrix("encoder.pos", kMaxPathLength, d);
    for (std::size_t l = 0; l < config_.layers; ++l) {
      const auto pre = layer_prefix(l);
      for (const char* w : {"Wq", "Wk", "Wv", "Wo"}) matrix(pre + w, d, d);
      vec(pre + "ln1.gamma", d, 1.0);
      vec(pre + "ln1.beta", d, 0.0);
      matrix(pre + "ffn.W1", d, config_.ffn_dim);
      vec(pre + "ffn.b1", config_.ffn_dim, 0.0);
      matrix(pre + "ffn.W2", config_.ffn_dim, d);
      vec(pre + "ffn.b2", d, 0.0);
      vec(pre + "ln2.gamma", d, 1.0);
      vec(pre + "ln2.beta", d, 0.0);
    }
  }
  for (auto t : {NodeType::Gene, NodeType::Disease})
    for (auto s : schemas_for_target(t, config_.schema_options())) {
      const std::string n = "intra." + std::string(name(s)) + ".a";
      params_.add(n, {h, 2 * d}, xavier(2 * d, 1, h * 2 * d, seed, n));
    }
  matrix("inter.W_s", d, d);
  vec("inter.b_s", d, 0.0);
  params_.add("inter.q", {d}, xavier(d, 1, d, seed, "inter.q"));

  std::vector<double> expand(h * d, 0.0);
  const std::size_t dh = d / h;
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t c = i * dh; c < (i + 1) * dh; ++c) expand[i * d + c] = 1.0;
  head_expand_ = Tensor::from({h, d}, std::move(expand));
}

Tensor& CometModel::param(const std::string& name) const { return params_.get(name); }

Tensor CometModel::project(const HeteroGraph& graph, NodeType type) const {
  const auto* f = graph.features(type);
  if (!f) throw Error(ErrorCode::FeaturesNotLoaded, std::string(name(type)) + " features are not loaded");
  if (f->cols != config_.input_dims[index_of(type)])
    throw Error(ErrorCode::FeatureDimMismatch,
                std::string(name(type)) + " features have width " + std::to_string(f->cols) +
                    ", model expects " + std::to_string(config_.input_dims[index_of(type)]));
  const std::string pre = "proj." + std::string(file_stem(type)) + ".";
  auto h = Tensor::from({f->rows, f->cols}, f->data);
  return ops::add(ops::matmul(h, param(pre + "W")), param(pre + "b"));
}

Tensor CometModel::project_node(const HeteroGraph& graph, NodeId node) const {
  if (node.index >= graph.node_count(node.type))
    throw Error(ErrorCode::InvalidNode, "node index out of range");
  const std::uint32_t idx = node.index;
  auto row = ops::embedding_lookup(project(graph, node.type), std::span(&idx, 1));
  return ops::reshape(row, {config_.hidden_dim});
}

Tensor CometModel::transformer(const Tensor& tokens, Rng* rng) const {
  const std::size_t n = tokens.dim(0), len = tokens.dim(1), d = config_.hidden_dim;
  const std::size_t h = config_.heads, dh = d / h;
  const double drop = rng ? config_.dropout : 0.0;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));

  Tensor x = ops::add(tokens, ops::slice(param("encoder.pos"), 0, 0, len));
  auto split_heads = [&](const Tensor& t) {
    return ops::transpose(ops::reshape(t, {n, len, h, dh}), 1, 2);  // [n, h, len, dh]
  };
  for (std::size_t l = 0; l < config_.layers; ++l) {
    const auto pre = layer_prefix(l);
    auto q = split_heads(ops::matmul(x, param(pre + "Wq")));
    auto k = split_heads(ops::matmul(x, param(pre + "Wk")));
    auto v = split_heads(ops::matmul(x, param(pre + "Wv")));
    auto attn = ops::softmax(ops::scale(ops::matmul(q, k, true), inv_sqrt), 3);
    auto ctx = ops::reshape(ops::transpose(ops::matmul(attn, v), 1, 2), {n, len, d});
    auto out = ops::matmul(ctx, param(pre + "Wo"));
    if (drop > 0.0) out = ops::dropout(out, drop, *rng);
    x = ops::add(x, out);
    if (!config_.test_mode)
      x = ops::add(ops::mul(ops::layer_norm(x, 2), param(pre + "ln1.gamma")), param(pre + "ln1.beta"));

    auto hidden = ops::relu(ops::add(ops::matmul(x, param(pre + "ffn.W1")), param(pre + "ffn.b1")));
    auto ffn = ops::add(ops::matmul(hidden, param(pre + "ffn.W2")), param(pre + "ffn.b2"));
    if (drop > 0.0) ffn = ops::dropout(ffn, drop, *rng);
    x = ops::add(x, ffn);
    if (!config_.test_mode)
      x = ops::add(ops::mul(ops::layer_norm(x, 2), param(pre + "ln2.gamma")), param(pre + "ln2.beta"));
  }
  return ops::mean(x, 1);
}

Tensor CometModel::encode(const Tensor& tokens, Rng* rng) const {
  if (tokens.rank() != 3 || tokens.dim(2) != config_.hidden_dim)
    throw Error(ErrorCode::ShapeError, "encode expects [N, L, d] tokens, got " + ad::to_string(tokens.shape()));
  if (tokens.dim(1) > kMaxPathLength)
    throw Error(ErrorCode::PathTooLong, "instance length " + std::to_string(tokens.dim(1)) + " exceeds " +
                                            std::to_string(kMaxPathLength));
  switch (config_.encoder) {
    case EncoderMode::Average: return ops::mean(tokens, 1);
    case EncoderMode::MaxPool: return ops::max(tokens, 1);
    case EncoderMode::Transformer: break;
  }
  return transformer(tokens, rng);
}

Tensor CometModel::encode_instance(const MetapathInstance& instance, const Tensor& projected) const {
  const std::size_t len = instance.nodes.size();
  if (len > kMaxPathLength)
    throw Error(ErrorCode::PathTooLong, "instance length " + std::to_string(len) + " exceeds " +
                                            std::to_string(kMaxPathLength));
  if (projected.rank() != 2 || projected.dim(0) != len || projected.dim(1) != config_.hidden_dim)
    throw Error(ErrorCode::ShapeError, "projected tokens must be [L, d]");
  auto out = encode(ops::reshape(projected, {1, len, config_.hidden_dim}));
  return ops::reshape(out, {config_.hidden_dim});
}

IntraResult CometModel::intra_aggregate(SchemaId schema, const Tensor& instances,
                                        std::span<const std::uint32_t> segment, const Tensor& targets,
                                        Activation sigma) const {
  const std::size_t d = config_.hidden_dim;
  const std::size_t t = targets.dim(0);
  const std::size_t n = segment.size();
  if (n > 0 && (instances.rank() != 2 || instances.dim(0) != n || instances.dim(1) != d))
    throw Error(ErrorCode::ShapeError, "instance embeddings must be [N, d] with one segment id each");

  const auto& a = param("intra." + std::string(name(schema)) + ".a");
  auto a_target = ops::slice(a, 1, 0, d);
  auto a_other = ops::slice(a, 1, d, 2 * d);
  auto s_target = ops::matmul(targets, a_target, true);  // [T, H]
  auto w_self = ops::leaky_relu(ops::add(s_target, ops::matmul(targets, a_other, true)), config_.leaky_slope);

  IntraResult result;
  result.segment.assign(segment.begin(), segment.end());
  for (std::uint32_t i = 0; i < t; ++i) result.segment.push_back(i);

  Tensor scores = w_self;
  Tensor values = targets;
  if (n > 0) {
    auto w_inst = ops::leaky_relu(
        ops::add(ops::embedding_lookup(s_target, segment), ops::matmul(instances, a_other, true)),
        config_.leaky_slope);
    const std::array<Tensor, 2> s{w_inst, w_self};
    const std::array<Tensor, 2> v{instances, targets};
    scores = ops::concat(s, 0);
    values = ops::concat(v, 0);
  }
  result.alpha = ops::segment_softmax(scores, result.segment, t);
  auto weights = ops::matmul(result.alpha, head_expand_);  // alpha of head h on its slice
  result.z = activate(ops::segment_sum(ops::mul(weights, values), result.segment, t), sigma);
  return result;
}

InterResult CometModel::inter_aggregate(std::span<const Tensor> per_schema) const {
  if (per_schema.empty()) throw Error(ErrorCode::InvalidConfig, "inter_aggregate needs at least one schema");
  const std::size_t d = config_.hidden_dim;
  const std::size_t t = per_schema[0].dim(0);
  auto q = ops::reshape(param("inter.q"), {d, 1});
  std::vector<Tensor> scores, flat;
  for (const auto& z : per_schema) {
    if (z.rank() != 2 || z.dim(0) != t || z.dim(1) != d)
      throw Error(ErrorCode::ShapeError, "per-schema embeddings must share shape [T, d]");
    auto proj = ops::tanh(ops::add(ops::matmul(z, param("inter.W_s")), param("inter.b_s")));
    scores.push_back(ops::mean(ops::matmul(proj, q), 0));  // [1]
    flat.push_back(ops::reshape(z, {1, t * d}));
  }
  InterResult r;
  r.beta = ops::softmax(ops::concat(scores, 0), 0);
  auto mixed = ops::matmul(ops::reshape(r.beta, {1, per_schema.size()}), ops::concat(flat, 0));
  r.z = ops::reshape(mixed, {t, d});
  return r;
}

ForwardResult CometModel::forward(const HeteroGraph& graph, const ForwardPlan& plan,
                                  const ForwardOptions& options) const {
  const std::size_t d = config_.hidden_dim;
  std::vector<Tensor> parts;
  for (auto t : kNodeTypes)
    if (graph.node_count(t) > 0) parts.push_back(project(graph, t));
  if (parts.empty()) throw Error(ErrorCode::InvalidNode, "graph has no nodes");
  auto table = ops::concat(parts, 0);
  if (table.dim(0) != plan.total_nodes)
    throw Error(ErrorCode::InvalidConfig, "forward plan does not match graph");

  Rng rng(options.dropout_seed);
  Rng* drop_rng = options.training && config_.dropout > 0.0 ? &rng : nullptr;

  ForwardResult result;
  for (const auto& target : plan.targets) {
    auto self = ops::embedding_lookup(table, target.rows);
    std::vector<Tensor> per_schema;
    SemanticTrace trace{target.type, {}, {}};
    for (const auto& s : target.schemas) {
      Tensor inst;
      if (s.count() > 0) {
        auto tokens = ops::reshape(ops::embedding_lookup(table, s.rows), {s.count(), s.length, d});
        inst = encode(tokens, drop_rng);
      }
      auto intra = intra_aggregate(s.id, inst, s.segment, self, config_.final_activation);
      result.alphas.push_back({target.type, s.id, intra.alpha, std::move(intra.segment)});
      per_schema.push_back(intra.z);
      trace.schemas.push_back(s.id);
    }
    auto inter = inter_aggregate(per_schema);
    trace.beta = inter.beta;
    result.betas.push_back(std::move(trace));
    (target.type == NodeType::Gene ? result.embeddings.genes : result.embeddings.diseases) = inter.z;
  }
  return result;
}

double score_pair(std::span<const double> z_d, std::span<const double> z_g) {
  if (z_d.size() != z_g.size()) throw Error(ErrorCode::ShapeError, "embedding widths differ");
  double dot = 0.0;
  for (std::size_t i = 0; i < z_d.size(); ++i) dot += z_d[i] * z_g[i];
  return dot >= 0 ? 1.0 / (1.0 + std::exp(-dot)) : std::exp(dot) / (1.0 + std::exp(dot));
}

Tensor pair_logits(const NodeEmbeddings& emb, std::span<const DiseaseGenePair> pairs) {
  std::vector<std::uint32_t> d_idx, g_idx;
  d_idx.reserve(pairs.size());
  g_idx.reserve(pairs.size());
  for (const auto& p : pairs) {
    d_idx.push_back(p.disease);
    g_idx.push_back(p.gene);
  }
  auto zd = ops::embedding_lookup(emb.diseases, d_idx);
  auto zg = ops::embedding_lookup(emb.genes, g_idx);
  return ops::sum(ops::mul(zd, zg), 1);
}

Tensor link_loss_from_logits(const Tensor& positive_logits, const Tensor& negative_logits) {
  auto total = ops::sum_all(ops::log_sigmoid(positive_logits));
  if (negative_logits.defined() && negative_logits.numel() > 0)
    total = ops::add(total, ops::sum_all(ops::log_sigmoid(ops::neg(negative_logits))));
  return ops::neg(total);
}

Tensor link_loss(const NodeEmbeddings& emb, std::span<const DiseaseGenePair> positives,
                 std::span<const DiseaseGenePair> negatives) {
  if (positives.empty()) throw Error(ErrorCode::InvalidConfig, "loss needs at least one positive pair");
  Tensor neg_logits;
  if (!negatives.empty()) neg_logits = pair_logits(emb, negatives);
  return link_loss_from_logits(pair_logits(emb, positives), neg_logits);
}

}  // namespace comet
