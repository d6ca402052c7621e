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

#include "comet/trainer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "binary_io.hpp"
#include "comet/error.hpp"
#include "comet/metrics.hpp"
#include "comet/rng.hpp"

namespace comet {

namespace {

constexpr std::array<char, 8> kCheckpointMagic = {'C', 'M', 'T', 'C', 'K', 'P', 'T', '1'};

// Substream keys under the run seed.
constexpr std::uint64_t kSplitKey = 0x5B117ULL;
constexpr std::uint64_t kPlanKey = 0x91A4ULL;
constexpr std::uint64_t kValNegKey = 0x7A1ULL;
constexpr std::uint64_t kEpochKey = 0xE90CULL;
constexpr std::uint64_t kNegKey = 0x4E6ULL;
constexpr std::uint64_t kDropKey = 0xD409ULL;
constexpr std::uint64_t kMaskPlanKey = 0x3A5CULL;

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

std::size_t part_size(std::size_t n, double ratio) {
  // The epsilon keeps exact products such as 10 * 0.1 from rounding down.
  return static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratio + 1e-9));
}

std::vector<std::pair<NodeId, NodeId>> as_edges(std::span<const DiseaseGenePair> pairs) {
  std::vector<std::pair<NodeId, NodeId>> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back({{NodeType::Gene, p.gene}, {NodeType::Disease, p.disease}});
  return out;
}

}  // namespace

// ---------------------------------------------------------------- config

void TrainConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
  if (epochs == 0) fail("epochs must be >= 1");
  if (!(learning_rate >= 0.0)) fail("learning_rate must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) fail("Adam betas must lie in [0, 1)");
  if (!(eps > 0.0)) fail("eps must be positive");
  if (negatives_per_positive == 0) fail("negatives_per_positive must be >= 1");
  if (batch_size == 0) fail("batch_size must be >= 1");
  if (!(supervision_fraction >= 0.0 && supervision_fraction <= 1.0)) fail("supervision_fraction must lie in [0, 1]");
  double total = 0.0;
  for (double r : split_ratios) {
    if (!(r > 0.0)) fail("split ratios must be positive");
    total += r;
  }
  if (std::abs(total - 1.0) > 1e-9) fail("split ratios must sum to 1");
}

std::string TrainConfig::to_kv() const {
  std::ostringstream os;
  os << "epochs=" << epochs << "\n"
     << "learning_rate=" << fmt_double(learning_rate) << "\n"
     << "beta1=" << fmt_double(beta1) << "\n"
     << "beta2=" << fmt_double(beta2) << "\n"
     << "eps=" << fmt_double(eps) << "\n"
     << "negatives_per_positive=" << negatives_per_positive << "\n"
     << "batch_size=" << batch_size << "\n"
     << "supervision_fraction=" << fmt_double(supervision_fraction) << "\n"
     << "split_ratios=" << fmt_double(split_ratios[0]) << "," << fmt_double(split_ratios[1]) << ","
     << fmt_double(split_ratios[2]) << "\n"
     << "patience=" << patience << "\n"
     << "seed=" << seed << "\n";
  return os.str();
}

TrainConfig TrainConfig::from_kv(const std::string& text) {
  TrainConfig c;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::InvalidConfig, "expected key=value: '" + line + "'");
    const std::string_view key(line.data(), eq);
    const std::string_view v(line.data() + eq + 1, line.size() - eq - 1);
    if (key == "epochs") c.epochs = parse_number<std::size_t>(key, v);
    else if (key == "learning_rate") c.learning_rate = parse_number<double>(key, v);
    else if (key == "beta1") c.beta1 = parse_number<double>(key, v);
    else if (key == "beta2") c.beta2 = parse_number<double>(key, v);
    else if (key == "eps") c.eps = parse_number<double>(key, v);
    else if (key == "negatives_per_positive") c.negatives_per_positive = parse_number<std::size_t>(key, v);
    else if (key == "batch_size") c.batch_size = parse_number<std::size_t>(key, v);
    else if (key == "supervision_fraction") c.supervision_fraction = parse_number<double>(key, v);
    else if (key == "split_ratios") {
      std::size_t i = 0;
      std::string_view rest = v;
      while (true) {
        const auto comma = rest.find(',');
        if (i == 3) throw Error(ErrorCode::InvalidConfig, "split_ratios needs 3 values");
        c.split_ratios[i++] = parse_number<double>(key, rest.substr(0, comma));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
      }
      if (i != 3) throw Error(ErrorCode::InvalidConfig, "split_ratios needs 3 values");
    } else if (key == "patience") c.patience = parse_number<std::size_t>(key, v);
    else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, v);
    else throw Error(ErrorCode::InvalidConfig, "unknown train config key '" + std::string(key) + "'");
  }
  return c;
}

// ---------------------------------------------------------------- data

std::vector<DiseaseGenePair> gene_disease_pairs(const HeteroGraph& graph) {
  std::vector<DiseaseGenePair> out;
  for (std::uint32_t d = 0; d < graph.node_count(NodeType::Disease); ++d)
    for (auto g : graph.neighbors({NodeType::Disease, d}, RelationType::DiseaseGene)) out.push_back({d, g});
  return out;
}

EdgeSplit split_edges(const HeteroGraph& graph, const std::array<double, 3>& ratios, std::uint64_t seed) {
  auto pairs = gene_disease_pairs(graph);
  if (pairs.empty()) throw Error(ErrorCode::SplitError, "graph has no gene-disease edges");
  const std::size_t n = pairs.size();
  const std::size_t n_val = part_size(n, ratios[1]);
  const std::size_t n_test = part_size(n, ratios[2]);
  if (n_val == 0 || n_test == 0 || n_val + n_test >= n)
    throw Error(ErrorCode::SplitError,
                std::to_string(n) + " gene-disease edges are too few for nonempty train/validation/test parts");
  auto rng = make_rng(seed, {kSplitKey});
  std::shuffle(pairs.begin(), pairs.end(), rng);

  EdgeSplit split;
  const auto val_end = pairs.begin() + static_cast<std::ptrdiff_t>(n_val);
  const auto test_end = val_end + static_cast<std::ptrdiff_t>(n_test);
  split.validation.assign(pairs.begin(), val_end);
  split.test.assign(val_end, test_end);
  split.train.assign(test_end, pairs.end());
  for (auto* part : {&split.train, &split.validation, &split.test}) std::sort(part->begin(), part->end());
  return split;
}

HeteroGraph training_graph(const HeteroGraph& graph, const EdgeSplit& split) {
  auto removed = as_edges(split.validation);
  const auto test = as_edges(split.test);
  removed.insert(removed.end(), test.begin(), test.end());
  return graph.without_edges(RelationType::GeneDisease, removed);
}

void PairSet::insert(std::span<const DiseaseGenePair> pairs) {
  for (const auto& p : pairs) set_.insert(key(p));
}

std::vector<DiseaseGenePair> sample_negatives(std::size_t n_diseases, std::size_t n_genes, const PairSet& observed,
                                              std::size_t count, std::uint64_t seed) {
  const std::size_t total = n_diseases * n_genes;
  bool exhausted = total == 0;
  if (!exhausted && observed.size() >= total) {
    exhausted = true;
    for (std::uint32_t d = 0; d < n_diseases && exhausted; ++d)
      for (std::uint32_t g = 0; g < n_genes && exhausted; ++g)
        if (!observed.contains({d, g})) exhausted = false;
  }
  if (exhausted) throw Error(ErrorCode::ExhaustedSpace, "every disease-gene pair is observed");

  auto rng = make_rng(seed, {kNegKey});
  std::uniform_int_distribution<std::uint32_t> pick_d(0, static_cast<std::uint32_t>(n_diseases - 1));
  std::uniform_int_distribution<std::uint32_t> pick_g(0, static_cast<std::uint32_t>(n_genes - 1));
  std::vector<DiseaseGenePair> out;
  out.reserve(count);
  while (out.size() < count) {
    DiseaseGenePair p{pick_d(rng), pick_g(rng)};
    if (!observed.contains(p)) out.push_back(p);
  }
  return out;
}

std::vector<DiseaseGenePair> sample_negatives(const HeteroGraph& graph, std::size_t count, std::uint64_t seed,
                                              std::span<const DiseaseGenePair> extra_excluded) {
  PairSet observed(gene_disease_pairs(graph));
  observed.insert(extra_excluded);
  return sample_negatives(graph.node_count(NodeType::Disease), graph.node_count(NodeType::Gene), observed, count,
                          seed);
}

// ---------------------------------------------------------------- optimizer

Adam::Adam(double lr, double beta1, double beta2, double eps) : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

void Adam::step(ad::ParameterStore& params) {
  auto& all = params.all();
  if (m_.empty()) {
    for (const auto& p : all) {
      m_.emplace_back(p.tensor.numel(), 0.0);
      v_.emplace_back(p.tensor.numel(), 0.0);
    }
  }
  if (m_.size() != all.size()) throw Error(ErrorCode::InvalidConfig, "optimizer bound to a different parameter set");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < all.size(); ++i) {
    auto value = all[i].tensor.mutable_data();
    auto grad = all[i].tensor.mutable_grad();
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t k = 0; k < value.size(); ++k) {
      const double g = grad[k];
      m[k] = beta1_ * m[k] + (1.0 - beta1_) * g;
      v[k] = beta2_ * v[k] + (1.0 - beta2_) * g * g;
      value[k] -= lr_ * (m[k] / c1) / (std::sqrt(v[k] / c2) + eps_);
    }
  }
}

// ---------------------------------------------------------------- training

TrainingData prepare_training(const HeteroGraph& graph, const ModelConfig& model, const TrainConfig& train,
                              std::span<const DiseaseGenePair> extra_positives) {
  train.validate();
  TrainingData data;
  data.split = split_edges(graph, train.split_ratios, train.seed);
  data.graph = training_graph(graph, data.split);
  data.plan = build_forward_plan(data.graph, model, derive_seed(train.seed, {kPlanKey}));
  data.observed.insert(gene_disease_pairs(graph));
  data.observed.insert(extra_positives);
  data.validation_negatives =
      sample_negatives(graph.node_count(NodeType::Disease), graph.node_count(NodeType::Gene), data.observed,
                       data.split.validation.size(), derive_seed(train.seed, {kValNegKey}));
  return data;
}

std::size_t step_size(const TrainConfig& config, std::size_t n_train) {
  if (config.supervision_fraction <= 0.0) return config.batch_size;
  const auto share = static_cast<std::size_t>(std::ceil(config.supervision_fraction * static_cast<double>(n_train)));
  return std::clamp<std::size_t>(share, 1, config.batch_size);
}

EpochReport train_epoch(CometModel& model, Adam& optimizer, const TrainingData& data, const TrainConfig& config,
                        std::uint64_t epoch_seed) {
  auto order = data.split.train;
  auto rng = make_rng(epoch_seed, {kEpochKey});
  std::shuffle(order.begin(), order.end(), rng);

  const auto n_genes = data.graph.node_count(NodeType::Gene);
  const auto n_diseases = data.graph.node_count(NodeType::Disease);
  const bool mask = config.supervision_fraction > 0.0;
  const std::size_t step = step_size(config, order.size());
  EpochReport report;
  double loss_total = 0.0;
  std::size_t scored = 0;
  for (std::size_t start = 0, b = 0; start < order.size(); start += step, ++b) {
    std::vector<DiseaseGenePair> positives(order.begin() + static_cast<std::ptrdiff_t>(start),
                                           order.begin() + static_cast<std::ptrdiff_t>(std::min(start + step, order.size())));
    std::sort(positives.begin(), positives.end());
    const auto negatives = sample_negatives(n_diseases, n_genes, data.observed,
                                            positives.size() * config.negatives_per_positive,
                                            derive_seed(epoch_seed, {kNegKey, b}));
    std::optional<HeteroGraph> masked_graph;
    std::optional<ForwardPlan> masked_plan;
    if (mask) {
      const auto hidden = as_edges(positives);
      masked_graph = data.graph.without_edges(RelationType::GeneDisease, hidden);
      masked_plan = build_forward_plan(*masked_graph, model.config(), derive_seed(epoch_seed, {kMaskPlanKey, b}));
    }
    const HeteroGraph& graph = mask ? *masked_graph : data.graph;
    const ForwardPlan& plan = mask ? *masked_plan : data.plan;

    ad::Tape tape;
    double value = 0.0;
    try {
      ad::Tape::Guard guard(tape);
      model.params().zero_grad();
      const auto result = model.forward(graph, plan, {true, derive_seed(epoch_seed, {kDropKey, b})});
      const auto loss = link_loss(result.embeddings, positives, negatives);
      value = loss.item();
      if (!std::isfinite(value)) throw Error(ErrorCode::NumericalError, "loss is " + std::to_string(value));
      tape.backward(loss);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NumericalError) throw;
      std::string msg = e.what();
      const auto prefix = std::string(to_string(e.code())) + ": ";
      if (msg.starts_with(prefix)) msg.erase(0, prefix.size());
      throw Error(ErrorCode::NumericalError,
                  msg + " (batch " + std::to_string(b) + ", shuffled positives " +
                      std::to_string(start) + ".." + std::to_string(start + positives.size()) + ")");
    }
    optimizer.step(model.params());
    loss_total += value;
    scored += positives.size() + negatives.size();
    ++report.batches;
  }
  report.mean_loss = scored ? loss_total / static_cast<double>(scored) : 0.0;
  return report;
}

std::pair<double, double> validation_metrics(const CometModel& model, const TrainingData& data) {
  const auto result = model.forward(data.graph, data.plan);
  const auto scored = score_pairs(result.embeddings, data.split.validation, data.validation_negatives);
  return {auc_roc(scored), auc_pr(scored)};
}

bool EarlyStopper::update(double value) {
  if (!any_ || value > best_) {
    any_ = true;
    best_ = value;
    stale_ = 0;
    return true;
  }
  ++stale_;
  return false;
}

FitResult fit(CometModel& model, const TrainingData& data, const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  Adam optimizer(config);
  EarlyStopper stopper(config.patience);
  FitResult out;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto report = train_epoch(model, optimizer, data, config, derive_seed(config.seed, {kEpochKey, epoch}));
    const auto [auc, aupr] = validation_metrics(model, data);
    const EpochRecord record{epoch, report.mean_loss, auc, aupr};
    out.history.push_back(record);
    if (on_epoch) on_epoch(record);
    if (stopper.update(auc)) {
      out.best.model = model.config();
      out.best.epoch = epoch;
      out.best.validation_auc = auc;
      out.best.validation_aupr = aupr;
      out.best.params = model.params().clone();
    }
    if (stopper.should_stop()) break;
  }
  model.params().assign(out.best.params);
  return out;
}

// ---------------------------------------------------------------- checkpoints

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(kCheckpointMagic.data(), kCheckpointMagic.size());
  detail::put<std::uint32_t>(out, kCheckpointVersion);
  detail::put<std::uint64_t>(out, ckpt.epoch);
  detail::put_f64(out, ckpt.validation_auc);
  detail::put_f64(out, ckpt.validation_aupr);
  const auto cfg = ckpt.model.to_kv();
  detail::put<std::uint64_t>(out, cfg.size());
  out.write(cfg.data(), static_cast<std::streamsize>(cfg.size()));
  ad::write_parameters(out, ckpt.params);
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (in.gcount() != static_cast<std::streamsize>(magic.size()) || magic != kCheckpointMagic)
    throw Error(ErrorCode::FormatError, path.string() + ": not a checkpoint (bad magic)");
  const auto version = detail::get<std::uint32_t>(in, "checkpoint");
  if (version != kCheckpointVersion)
    throw Error(ErrorCode::IncompatibleCheckpoint, path.string() + ": checkpoint version " +
                                                       std::to_string(version) + ", expected " +
                                                       std::to_string(kCheckpointVersion));
  Checkpoint ckpt;
  ckpt.epoch = detail::get<std::uint64_t>(in, "checkpoint");
  ckpt.validation_auc = detail::get_f64(in, "checkpoint");
  ckpt.validation_aupr = detail::get_f64(in, "checkpoint");
  const auto len = detail::get<std::uint64_t>(in, "checkpoint");
  if (len > (1u << 20)) throw Error(ErrorCode::FormatError, path.string() + ": implausible config length");
  std::string cfg(len, '\0');
  in.read(cfg.data(), static_cast<std::streamsize>(len));
  if (in.gcount() != static_cast<std::streamsize>(len)) throw Error(ErrorCode::FormatError, "truncated checkpoint");
  try {
    ckpt.model = ModelConfig::from_kv(cfg);
  } catch (const Error& e) {
    throw Error(ErrorCode::FormatError, path.string() + ": bad config block: " + e.what());
  }
  ckpt.params = ad::read_parameters(in);
  if (in.peek() != std::char_traits<char>::eof())
    throw Error(ErrorCode::FormatError, path.string() + ": trailing bytes after checkpoint");
  return ckpt;
}

CometModel restore_model(const Checkpoint& ckpt) {
  CometModel model(ckpt.model);
  try {
    model.params().assign(ckpt.params);
  } catch (const Error& e) {
    throw Error(ErrorCode::IncompatibleCheckpoint, std::string("checkpoint does not fit its config: ") + e.what());
  }
  return model;
}

}  // namespace comet
