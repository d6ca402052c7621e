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

#include "comet/experiment.hpp"

#include <algorithm>
#include <cstdio>

#include "comet/error.hpp"
#include "comet/rng.hpp"

namespace comet {

namespace {

constexpr std::uint64_t kEvalKey = 0xE7A1ULL;
constexpr std::uint64_t kRandomFeatureKey = 0xF3A7ULL;

EvalReport mean_report(std::span<const EvalReport> reports) {
  EvalReport m;
  if (reports.empty()) return m;
  for (const auto& r : reports) {
    m.auc += r.auc;
    m.aupr += r.aupr;
    m.threshold += r.threshold;
    m.youden_j += r.youden_j;
    m.precision += r.precision;
    m.recall += r.recall;
    m.f1 += r.f1;
    m.accuracy += r.accuracy;
    m.counts.tp += r.counts.tp;
    m.counts.fp += r.counts.fp;
    m.counts.tn += r.counts.tn;
    m.counts.fn += r.counts.fn;
  }
  const double n = static_cast<double>(reports.size());
  for (double* v : {&m.auc, &m.aupr, &m.threshold, &m.youden_j, &m.precision, &m.recall, &m.f1, &m.accuracy})
    *v /= n;
  return m;
}

}  // namespace

std::string config_fingerprint(const ModelConfig& model, const TrainConfig& train) {
  Fnv1a h;
  h.update(model.to_kv());
  h.update("--\n");
  h.update(train.to_kv());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h.digest()));
  return buf;
}

std::uint64_t evaluation_seed(const TrainConfig& train) { return derive_seed(train.seed, {kEvalKey}); }

ExperimentResult run_experiment(const HeteroGraph& graph, std::span<const DiseaseGenePair> heldout,
                                const ModelConfig& model_config, const TrainConfig& train,
                                const EpochCallback& on_epoch) {
  CometModel model(model_config, graph);
  const auto data = prepare_training(graph, model.config(), train, heldout);
  ExperimentResult out;
  out.fit = fit(model, data, train, on_epoch);

  auto known = gene_disease_pairs(graph);
  known.insert(known.end(), heldout.begin(), heldout.end());
  out.used_heldout = !heldout.empty();
  const std::span<const DiseaseGenePair> positives =
      out.used_heldout ? heldout : std::span<const DiseaseGenePair>(data.split.test);
  out.test_positives = positives.size();
  out.test = evaluate(model, data.graph, data.plan, positives, known, evaluation_seed(train));
  return out;
}

std::string_view name(AblationAxis axis) noexcept {
  switch (axis) {
    case AblationAxis::NodeFeatures: return "node_features";
    case AblationAxis::Encoder: return "encoder";
    case AblationAxis::DropSchema: return "drop_schema";
  }
  return "node_features";
}

std::optional<AblationAxis> parse_axis(std::string_view s) noexcept {
  for (auto a : {AblationAxis::NodeFeatures, AblationAxis::Encoder, AblationAxis::DropSchema})
    if (s == name(a)) return a;
  return std::nullopt;
}

void validate_axis_value(AblationAxis axis, std::string_view value) {
  bool ok = false;
  switch (axis) {
    case AblationAxis::NodeFeatures: ok = value == "random" || value == "file"; break;
    case AblationAxis::Encoder: ok = parse_encoder(value).has_value(); break;
    case AblationAxis::DropSchema: {
      const auto id = parse_schema(value);
      ok = id.has_value() && *id != SchemaId::DG;
      break;
    }
  }
  if (!ok)
    throw Error(ErrorCode::InvalidConfig,
                "invalid value '" + std::string(value) + "' for ablation axis " + std::string(name(axis)));
}

std::string ablation_label(AblationAxis axis, std::string_view value) {
  switch (axis) {
    case AblationAxis::NodeFeatures: return value == "random" ? "Random" : "COMET";
    case AblationAxis::Encoder: {
      const auto m = parse_encoder(value);
      if (m == EncoderMode::Average) return "Average";
      if (m == EncoderMode::MaxPool) return "Max-Pooling";
      return "COMET";
    }
    case AblationAxis::DropSchema: {
      const auto id = parse_schema(value);
      return id ? "w/o " + std::string(ablation_label(*id)) : "COMET";
    }
  }
  return "COMET";
}

HeteroGraph with_random_features(const HeteroGraph& graph, std::uint64_t seed) {
  auto copy = graph.thawed_copy();
  for (auto t : kNodeTypes)
    if (const auto* f = graph.features(t)) copy.randomize_features(t, f->cols, derive_seed(seed, {kRandomFeatureKey}));
  copy.freeze();
  return copy;
}

std::vector<AblationRow> ablate(const HeteroGraph& graph, std::span<const DiseaseGenePair> heldout,
                                const ModelConfig& base, const TrainConfig& train, AblationAxis axis,
                                std::span<const std::string> values, std::span<const std::uint64_t> seeds,
                                const std::function<void(const std::string&)>& log) {
  if (seeds.empty()) throw Error(ErrorCode::InvalidConfig, "ablation needs at least one seed");
  for (const auto& v : values) validate_axis_value(axis, v);

  std::vector<std::string> variants{""};  // "" is the unablated model
  for (const auto& v : values)
    if (ablation_label(axis, v) != "COMET" &&
        std::find(variants.begin(), variants.end(), v) == variants.end())
      variants.push_back(v);

  std::vector<AblationRow> rows;
  for (const auto& v : variants) {
    AblationRow row;
    row.label = v.empty() ? "COMET" : ablation_label(axis, v);
    ModelConfig mc = base;
    if (!v.empty() && axis == AblationAxis::Encoder) mc.encoder = *parse_encoder(v);
    if (!v.empty() && axis == AblationAxis::DropSchema) mc.dropped_schemas.push_back(*parse_schema(v));
    const bool random_features = !v.empty() && axis == AblationAxis::NodeFeatures;
    for (auto seed : seeds) {
      mc.init_seed = seed;
      TrainConfig tc = train;
      tc.seed = seed;
      if (row.fingerprint.empty()) row.fingerprint = config_fingerprint(mc, tc);
      const auto result = random_features
                              ? run_experiment(with_random_features(graph, seed), heldout, mc, tc)
                              : run_experiment(graph, heldout, mc, tc);
      row.per_seed.push_back(result.test);
      if (log) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s seed=%llu auc=%.4f aupr=%.4f best_epoch=%zu", row.label.c_str(),
                      static_cast<unsigned long long>(seed), result.test.auc, result.test.aupr,
                      result.fit.best.epoch);
        log(buf);
      }
    }
    row.mean = mean_report(row.per_seed);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_ablation_table(std::span<const AblationRow> rows) {
  std::string out = format_report_header() + "  fingerprint\n";
  for (const auto& r : rows) out += format_report_row(r.label, r.mean) + "  " + r.fingerprint + "\n";
  return out;
}

std::string ablation_json(std::span<const AblationRow> rows) {
  std::string out = "{\"schema_version\":1,\"rows\":[";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (i) out += ",";
    out += "{\"label\":\"" + r.label + "\",\"fingerprint\":\"" + r.fingerprint + "\",\"mean\":" + report_json(r.mean) +
           ",\"per_seed\":[";
    for (std::size_t k = 0; k < r.per_seed.size(); ++k) out += (k ? "," : "") + report_json(r.per_seed[k]);
    out += "]}";
  }
  return out + "]}";
}

}  // namespace comet
