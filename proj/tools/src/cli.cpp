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

#include "cli.hpp"

#include <CLI11.hpp>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "comet/datadir.hpp"
#include "comet/error.hpp"
#include "comet/experiment.hpp"
#include "comet/hetgraph.hpp"
#include "comet/metapath.hpp"
#include "comet/metrics.hpp"
#include "comet/model.hpp"
#include "comet/parallel.hpp"
#include "comet/rng.hpp"
#include "comet/synthbench.hpp"
#include "comet/trainer.hpp"

namespace comet::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

constexpr int kSchemaVersion = 1;
constexpr std::uint64_t kExportPlanKey = 0xE8B0ULL;

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string fingerprint_text(std::string_view text) {
  Fnv1a h;
  h.update(text);
  return hex64(h.digest());
}

std::string shortest(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

/// COMET_OUT_DIR, when set, replaces any requested output directory.
fs::path output_dir(const fs::path& requested) {
  if (const char* env = std::getenv("COMET_OUT_DIR"); env != nullptr && *env != '\0') return env;
  return requested;
}

fs::path output_file(const fs::path& requested) {
  if (const char* env = std::getenv("COMET_OUT_DIR"); env != nullptr && *env != '\0')
    return fs::path(env) / requested.filename();
  return requested;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

json kv_object(const std::string& kv) {
  json obj = json::object();
  std::istringstream is(kv);
  std::string line;
  while (std::getline(is, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) obj[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return obj;
}

std::string metrics_line(const EvalReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "metrics auc=%.6f aupr=%.6f threshold=%.6f precision=%.6f recall=%.6f f1=%.6f accuracy=%.6f "
                "tp=%zu fp=%zu tn=%zu fn=%zu",
                r.auc, r.aupr, r.threshold, r.precision, r.recall, r.f1, r.accuracy, r.counts.tp, r.counts.fp,
                r.counts.tn, r.counts.fn);
  return buf;
}

struct Common {
  std::uint64_t seed = 42;
  std::size_t threads = 0;
};

struct ModelFlags {
  ModelConfig cfg;
  std::string encoder = "transformer";
  std::vector<std::string> drop;

  void add(CLI::App* app) {
    app->add_option("--hidden-dim", cfg.hidden_dim, "Embedding width d")->capture_default_str();
    app->add_option("--heads", cfg.heads, "Attention heads (must divide d)")->capture_default_str();
    app->add_option("--layers", cfg.layers, "Transformer encoder layers")->capture_default_str();
    app->add_option("--ffn-dim", cfg.ffn_dim, "Feed-forward width")->capture_default_str();
    app->add_option("--dropout", cfg.dropout, "Dropout rate")->capture_default_str();
    app->add_option("--cap", cfg.instance_cap, "Instances sampled per (node, schema)")->capture_default_str();
    app->add_option("--encoder", encoder, "Instance encoder: transformer|average|maxpool")->capture_default_str();
    app->add_option("--drop-schema", drop, "Schema to remove (repeatable), e.g. GDG");
    app->add_flag("--include-dg", cfg.include_reverse_gd, "Add the reverse DG schema for disease targets");
  }

  ModelConfig resolve(std::uint64_t seed) const {
    ModelConfig c = cfg;
    const auto mode = parse_encoder(encoder);
    if (!mode) throw Error(ErrorCode::InvalidConfig, "unknown encoder '" + encoder + "'");
    c.encoder = *mode;
    for (const auto& s : drop) {
      const auto id = parse_schema(s);
      if (!id) throw Error(ErrorCode::InvalidConfig, "unknown schema '" + s + "'");
      c.dropped_schemas.push_back(*id);
    }
    c.init_seed = seed;
    return c;
  }
};

struct TrainFlags {
  TrainConfig cfg;
  std::vector<double> ratios{0.8, 0.1, 0.1};

  void add(CLI::App* app) {
    app->add_option("--epochs", cfg.epochs, "Maximum epochs")->capture_default_str();
    app->add_option("--lr", cfg.learning_rate, "Adam learning rate")->capture_default_str();
    app->add_option("--batch-size", cfg.batch_size, "Positive pairs per step")->capture_default_str();
    app->add_option("--negatives", cfg.negatives_per_positive, "Negatives per positive")->capture_default_str();
    app->add_option("--patience", cfg.patience, "Early-stopping patience in epochs")->capture_default_str();
    app->add_option("--supervision-fraction", cfg.supervision_fraction,
                    "Share of training positives hidden from message passing per step (0 disables)")
        ->capture_default_str();
    app->add_option("--split", ratios, "Train, validation and test ratios")->expected(3)->capture_default_str();
  }

  TrainConfig resolve(std::uint64_t seed) const {
    TrainConfig c = cfg;
    c.split_ratios = {ratios[0], ratios[1], ratios[2]};
    c.seed = seed;
    c.validate();
    return c;
  }
};

// ---------------------------------------------------------------- commands

struct Context {
  std::ostream& out;
  std::ostream& err;
  const Common& common;
};

std::string graph_summary(const HeteroGraph& g) {
  std::ostringstream os;
  const auto s = g.stats();
  os << "nodes";
  for (auto t : kNodeTypes) os << " " << name(t) << "=" << s.nodes[index_of(t)];
  os << "\nedges";
  for (auto r : kStoredRelations) os << " " << name(r) << "=" << s.edges[index_of(r)];
  os << "\n";
  return os.str();
}

int cmd_build_graph(Context& ctx, const fs::path& data, const fs::path& out_path) {
  auto loaded = load_data_dir(data, ctx.common.seed);
  for (auto r : kStoredRelations) {
    const auto& rep = loaded.report.edges[index_of(r)];
    if (!rep) continue;
    ctx.out << "ingest " << file_stem(r) << " edges_added=" << rep->edges_added << " nodes_added=" << rep->nodes_added
            << " lines_skipped=" << rep->lines_skipped << " self_loops_dropped=" << rep->self_loops_dropped << "\n";
  }
  for (auto t : kNodeTypes) {
    const auto& rep = loaded.report.features[index_of(t)];
    if (rep)
      ctx.out << "features " << file_stem(t) << " dim=" << rep->dim << " rows_loaded=" << rep->rows_loaded
              << " rows_filled=" << rep->rows_filled << " unknown_labels=" << rep->unknown_labels << "\n";
    else if (loaded.report.randomized[index_of(t)])
      ctx.out << "features " << file_stem(t) << " randomized dim=" << kDefaultRandomFeatureDim << "\n";
  }
  ctx.out << graph_summary(loaded.graph);
  const auto dir = output_dir(out_path);
  write_data_dir(loaded.graph, loaded.heldout, dir);
  ctx.out << "wrote " << dir.string() << "\n";
  return kExitOk;
}

json stats_json(const HeteroGraph& g, std::size_t cap) {
  json j;
  j["schema_version"] = kSchemaVersion;
  const auto s = g.stats();
  json nodes = json::object(), edges = json::object(), features = json::object();
  for (auto t : kNodeTypes) {
    nodes[std::string(name(t))] = s.nodes[index_of(t)];
    const auto* f = g.features(t);
    features[std::string(name(t))] = f ? f->cols : 0;
  }
  for (auto r : kRelations) edges[std::string(name(r))] = s.edges[index_of(r)];
  j["nodes"] = nodes;
  j["edges"] = edges;
  j["feature_dims"] = features;
  json paths = json::object();
  SchemaOptions all;
  all.include_reverse_gd = true;
  for (auto t : {NodeType::Gene, NodeType::Disease})
    for (auto id : schemas_for_target(t, all)) {
      std::uint64_t total = 0, max = 0;
      std::size_t empty = 0, capped = 0;
      const auto n = g.node_count(t);
      for (std::uint32_t i = 0; i < n; ++i) {
        const auto c = count_instances(g, id, {t, i});
        total += c;
        max = std::max(max, c);
        empty += c == 0 ? 1 : 0;
        capped += c > cap ? 1 : 0;
      }
      paths[std::string(name(id))] = {{"targets", n},
                                      {"total_instances", total},
                                      {"mean_per_target", n ? static_cast<double>(total) / static_cast<double>(n) : 0.0},
                                      {"max_per_target", max},
                                      {"targets_without_instances", empty},
                                      {"targets_over_cap", capped}};
    }
  j["instance_cap"] = cap;
  j["metapaths"] = paths;
  return j;
}

int cmd_stats(Context& ctx, const fs::path& data, bool as_json, std::size_t cap) {
  const auto loaded = load_data_dir(data, ctx.common.seed);
  const auto j = stats_json(loaded.graph, cap);
  if (as_json) {
    ctx.out << j.dump(2) << "\n";
    return kExitOk;
  }
  ctx.out << graph_summary(loaded.graph);
  ctx.out << "heldout_pairs " << loaded.heldout.size() << "\n";
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-6s %8s %14s %10s %8s %8s %8s\n", "schema", "targets", "instances", "mean", "max",
                "empty", "over_cap");
  ctx.out << buf;
  for (const auto& [key, v] : j["metapaths"].items()) {
    std::snprintf(buf, sizeof buf, "%-6s %8zu %14llu %10.2f %8llu %8zu %8zu\n", key.c_str(),
                  v["targets"].get<std::size_t>(), v["total_instances"].get<unsigned long long>(),
                  v["mean_per_target"].get<double>(), v["max_per_target"].get<unsigned long long>(),
                  v["targets_without_instances"].get<std::size_t>(), v["targets_over_cap"].get<std::size_t>());
    ctx.out << buf;
  }
  return kExitOk;
}

int cmd_enumerate(Context& ctx, const fs::path& data, const std::vector<std::string>& schema_names,
                  const std::string& node_label, std::size_t cap, bool list) {
  const auto loaded = load_data_dir(data, ctx.common.seed);
  const auto& g = loaded.graph;
  std::vector<SchemaId> ids;
  for (const auto& s : schema_names) {
    const auto id = parse_schema(s);
    if (!id) throw Error(ErrorCode::InvalidConfig, "unknown schema '" + s + "'");
    ids.push_back(*id);
  }
  if (ids.empty()) {
    for (const auto& s : compile_schemas()) ids.push_back(s.id);
  }
  ctx.out << "# label\tschema\ttotal\tsampled\n";
  for (auto id : ids) {
    const auto t = schema(id).node_types.front();
    std::vector<std::uint32_t> targets;
    if (!node_label.empty()) {
      const auto n = g.find(t, node_label);
      if (!n) continue;
      targets.push_back(n->index);
    } else {
      for (std::uint32_t i = 0; i < g.node_count(t); ++i) targets.push_back(i);
    }
    for (auto i : targets) {
      const NodeId start{t, i};
      const auto set = sample_instances(g, id, start, cap, ctx.common.seed);
      ctx.out << g.label(start) << '\t' << name(id) << '\t' << count_instances(g, id, start) << '\t' << set.size()
              << '\n';
      if (!list) continue;
      for (std::size_t k = 0; k < set.size(); ++k) {
        const auto inst = set.instance(k);
        ctx.out << "  ";
        for (std::size_t p = 0; p < inst.nodes.size(); ++p) ctx.out << (p ? "\t" : "") << g.label(inst.nodes[p]);
        ctx.out << '\n';
      }
    }
  }
  if (!node_label.empty() && !g.find(NodeType::Gene, node_label) && !g.find(NodeType::Disease, node_label))
    throw Error(ErrorCode::InvalidNode, "no gene or disease labelled '" + node_label + "'");
  return kExitOk;
}

int cmd_synth(Context& ctx, SynthConfig config, const fs::path& out_path) {
  config.seed = ctx.common.seed;
  const auto data = generate(config);
  const auto dir = output_dir(out_path);
  write_dataset(data, dir);
  ctx.out << graph_summary(data.graph);
  ctx.out << "heldout_pairs " << data.heldout.size() << "\n";
  ctx.out << "wrote " << dir.string() << "\n";
  return kExitOk;
}

json data_manifest(const fs::path& dir, const LoadedData& loaded) {
  json files = json::object();
  auto add = [&](const fs::path& p) {
    if (fs::exists(p)) files[fs::relative(p, dir).generic_string()] = hex64(hash_file(p));
  };
  for (auto t : kNodeTypes) add(feature_file(dir, t));
  for (auto r : kStoredRelations) add(edge_file(dir, r));
  add(heldout_file(dir));
  return {{"hash", hex64(loaded.data_hash)}, {"files", files}};
}

std::string history_tsv(const std::vector<EpochRecord>& history) {
  std::string s = "epoch\tmean_loss\tvalidation_auc\tvalidation_aupr\n";
  for (const auto& r : history)
    s += std::to_string(r.epoch) + "\t" + shortest(r.mean_loss) + "\t" + shortest(r.validation_auc) + "\t" +
         shortest(r.validation_aupr) + "\n";
  return s;
}

int cmd_train(Context& ctx, const fs::path& data, const ModelFlags& mf, const TrainFlags& tf, const fs::path& out_path) {
  const auto seed = ctx.common.seed;
  const auto loaded = load_data_dir(data, seed);
  const auto train = tf.resolve(seed);
  const CometModel probe(mf.resolve(seed), loaded.graph);
  const auto& model_cfg = probe.config();
  const auto fingerprint = config_fingerprint(model_cfg, train);
  ctx.out << "config_fingerprint " << fingerprint << "\n";

  const auto result = run_experiment(loaded.graph, loaded.heldout, model_cfg, train, [&](const EpochRecord& r) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "epoch %zu loss=%.6f val_auc=%.6f val_aupr=%.6f", r.epoch, r.mean_loss,
                  r.validation_auc, r.validation_aupr);
    ctx.out << buf << "\n";
  });
  const auto& best = result.fit.best;
  const auto dir = output_dir(out_path);
  fs::create_directories(dir);
  save_checkpoint(best, dir / "checkpoint.bin");
  write_text(dir / "history.tsv", history_tsv(result.fit.history));

  json report;
  report["schema_version"] = kSchemaVersion;
  report["fingerprint"] = fingerprint;
  report["best_epoch"] = best.epoch;
  report["validation_auc"] = best.validation_auc;
  report["validation_aupr"] = best.validation_aupr;
  report["test_source"] = result.used_heldout ? "heldout" : "split";
  report["test_positives"] = result.test_positives;
  report["test"] = json::parse(report_json(result.test));
  write_text(dir / "report.json", report.dump(2) + "\n");

  json manifest;
  manifest["schema_version"] = kSchemaVersion;
  manifest["command"] = "train";
  manifest["fingerprint"] = fingerprint;
  manifest["seeds"] = {{"run", seed},
                       {"init", model_cfg.init_seed},
                       {"feature_fill", seed},
                       {"evaluation", evaluation_seed(train)}};
  manifest["model_config"] = kv_object(model_cfg.to_kv());
  manifest["train_config"] = kv_object(train.to_kv());
  manifest["data"] = data_manifest(data, loaded);
  manifest["outputs"] = {"checkpoint.bin", "history.tsv", "report.json"};
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");

  ctx.out << "best_epoch " << best.epoch << " validation_auc=" << shortest(best.validation_auc)
          << " validation_aupr=" << shortest(best.validation_aupr) << "\n";
  ctx.out << "test_source " << (result.used_heldout ? "heldout" : "split") << " positives=" << result.test_positives
          << "\n";
  ctx.out << metrics_line(result.test) << "\n";
  ctx.out << "wrote " << dir.string() << "\n";
  return kExitOk;
}

int cmd_eval(Context& ctx, const fs::path& data, const fs::path& checkpoint, const TrainFlags& tf,
             const std::string& report_path) {
  const auto seed = ctx.common.seed;
  const auto loaded = load_data_dir(data, seed);
  const auto ckpt = load_checkpoint(checkpoint);
  const auto model = restore_model(ckpt);
  const auto train = tf.resolve(seed);
  const auto fingerprint = config_fingerprint(model.config(), train);
  ctx.out << "config_fingerprint " << fingerprint << "\n";

  const auto prepared = prepare_training(loaded.graph, model.config(), train, loaded.heldout);
  const auto [val_auc, val_aupr] = validation_metrics(model, prepared);
  ctx.out << "checkpoint epoch=" << ckpt.epoch << " recorded_validation_auc=" << shortest(ckpt.validation_auc)
          << " recomputed_validation_auc=" << shortest(val_auc) << "\n";

  auto known = gene_disease_pairs(loaded.graph);
  known.insert(known.end(), loaded.heldout.begin(), loaded.heldout.end());
  const bool heldout = !loaded.heldout.empty();
  const std::span<const DiseaseGenePair> positives =
      heldout ? std::span<const DiseaseGenePair>(loaded.heldout) : std::span<const DiseaseGenePair>(prepared.split.test);
  const auto report = evaluate(model, prepared.graph, prepared.plan, positives, known, evaluation_seed(train));
  ctx.out << "test_source " << (heldout ? "heldout" : "split") << " positives=" << positives.size() << "\n";
  ctx.out << format_report_header() << "\n" << format_report_row("COMET", report) << "\n";
  ctx.out << metrics_line(report) << "\n";
  if (!report_path.empty()) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["fingerprint"] = fingerprint;
    j["test_source"] = heldout ? "heldout" : "split";
    j["test_positives"] = positives.size();
    j["test"] = json::parse(report_json(report));
    const auto path = output_file(report_path);
    write_text(path, j.dump(2) + "\n");
    ctx.out << "wrote " << path.string() << "\n";
  }
  return kExitOk;
}

int cmd_ablate(Context& ctx, const fs::path& data, const ModelFlags& mf, const TrainFlags& tf,
               const std::string& axis_name, const std::vector<std::string>& values,
               std::vector<std::uint64_t> seeds, const std::string& out_path) {
  const auto axis = parse_axis(axis_name);
  if (!axis) throw Error(ErrorCode::InvalidConfig, "unknown ablation axis '" + axis_name + "'");
  for (const auto& v : values) validate_axis_value(*axis, v);
  if (seeds.empty()) seeds.push_back(ctx.common.seed);

  const auto loaded = load_data_dir(data, ctx.common.seed);
  const auto train = tf.resolve(ctx.common.seed);
  const CometModel probe(mf.resolve(ctx.common.seed), loaded.graph);
  ctx.out << "config_fingerprint " << config_fingerprint(probe.config(), train) << "\n";
  const auto rows = ablate(loaded.graph, loaded.heldout, probe.config(), train, *axis, values, seeds,
                           [&](const std::string& line) { ctx.err << line << "\n"; });
  const auto table = format_ablation_table(rows);
  ctx.out << table;
  if (!out_path.empty()) {
    const auto dir = output_dir(out_path);
    write_text(dir / "ablation.txt", table);
    write_text(dir / "ablation.json", json::parse(ablation_json(rows)).dump(2) + "\n");
    ctx.out << "wrote " << dir.string() << "\n";
  }
  return kExitOk;
}

int cmd_export(Context& ctx, const fs::path& data, const fs::path& checkpoint, const fs::path& out_path) {
  const auto loaded = load_data_dir(data, ctx.common.seed);
  const auto ckpt = load_checkpoint(checkpoint);
  const auto model = restore_model(ckpt);
  ctx.out << "config_fingerprint " << fingerprint_text(model.config().to_kv()) << "\n";
  const auto plan = build_forward_plan(loaded.graph, model.config(), derive_seed(ctx.common.seed, {kExportPlanKey}));
  const auto result = model.forward(loaded.graph, plan);

  std::string text;
  auto dump = [&](NodeType t, const ad::Tensor& z) {
    const std::size_t d = z.dim(1);
    for (std::uint32_t i = 0; i < z.dim(0); ++i) {
      text += loaded.graph.label({t, i});
      for (std::size_t k = 0; k < d; ++k) text += "\t" + shortest(z.data()[i * d + k]);
      text += "\n";
    }
  };
  dump(NodeType::Gene, result.embeddings.genes);
  dump(NodeType::Disease, result.embeddings.diseases);
  const auto path = output_file(out_path);
  write_text(path, text);
  ctx.out << "exported " << result.embeddings.genes.dim(0) << " genes and " << result.embeddings.diseases.dim(0)
          << " diseases to " << path.string() << "\n";
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"COMET: metapath transformer for gene-disease association prediction", "comet"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Key-value config file ([command] sections); command-line flags win");
  Common common;
  app.add_option("--seed", common.seed, "Seed for every random choice")->capture_default_str();
  app.add_option("--threads", common.threads, "Worker threads (0 = all cores); results do not depend on it")
      ->capture_default_str();

  auto sub = [&app](const char* cmd, const char* help) {
    auto* s = app.add_subcommand(cmd, help);
    s->fallthrough();
    return s;
  };

  fs::path data, out_dir_flag, checkpoint;
  ModelFlags mf;
  TrainFlags tf;

  auto* build = sub("build-graph", "Ingest a data directory and write it back normalized");
  build->add_option("--data", data, "Input data directory")->required();
  build->add_option("--out", out_dir_flag, "Output data directory")->required();

  bool stats_json_flag = false;
  std::size_t cap = kDefaultInstanceCap;
  auto* stats = sub("stats", "Node, edge and metapath-instance statistics");
  stats->add_option("--data", data, "Data directory")->required();
  stats->add_flag("--json", stats_json_flag, "Machine-readable output");
  stats->add_option("--cap", cap, "Cap used to report over-cap targets")->capture_default_str();

  std::vector<std::string> schema_names;
  std::string node_label;
  bool list = false;
  auto* enumerate = sub("enumerate", "Per (node, schema) instance counts as TSV");
  enumerate->add_option("--data", data, "Data directory")->required();
  enumerate->add_option("--schema", schema_names, "Schema(s) to enumerate, e.g. GDG (default: all seven)");
  enumerate->add_option("--node", node_label, "Restrict to one start node label");
  enumerate->add_option("--cap", cap, "Sampling cap per (node, schema)")->capture_default_str();
  enumerate->add_flag("--instances", list, "Also print each sampled instance");

  SynthConfig sc;
  auto* synth = sub("synth", "Generate the planted block benchmark");
  synth->add_option("--out", out_dir_flag, "Output data directory")->required();
  synth->add_option("--genes", sc.n_genes)->capture_default_str();
  synth->add_option("--diseases", sc.n_diseases)->capture_default_str();
  synth->add_option("--go", sc.n_go)->capture_default_str();
  synth->add_option("--pheno", sc.n_pheno)->capture_default_str();
  synth->add_option("--blocks", sc.n_blocks)->capture_default_str();
  synth->add_option("--p-in", sc.p_in)->capture_default_str();
  synth->add_option("--p-out", sc.p_out)->capture_default_str();
  synth->add_option("--annotations", sc.annotations)->capture_default_str();
  synth->add_option("--feature-dim", sc.feature_dim)->capture_default_str();
  synth->add_option("--feature-noise", sc.feature_noise)->capture_default_str();
  synth->add_option("--centroid-scale", sc.centroid_scale)->capture_default_str();
  synth->add_option("--heldout-fraction", sc.heldout_fraction)->capture_default_str();

  auto* train = sub("train", "Train, early-stop on validation AUC, evaluate and checkpoint");
  train->add_option("--data", data, "Data directory")->required();
  train->add_option("--out", out_dir_flag, "Run directory")->capture_default_str();
  out_dir_flag = "runs/train";
  mf.add(train);
  tf.add(train);

  std::string report_path;
  auto* eval = sub("eval", "Evaluate a checkpoint on the test pairs");
  eval->add_option("--data", data, "Data directory")->required();
  eval->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  eval->add_option("--report", report_path, "Also write the report as JSON");
  tf.add(eval);

  std::string axis;
  std::vector<std::string> values;
  std::vector<std::uint64_t> seeds;
  std::string ablate_out;
  auto* abl = sub("ablate", "Train and evaluate ablated variants next to the full model");
  abl->add_option("--data", data, "Data directory")->required();
  abl->add_option("--axis", axis, "node_features | encoder | drop_schema")->required();
  abl->add_option("--value", values, "Axis value(s), e.g. random, average, maxpool, GDG")->required();
  abl->add_option("--seeds", seeds, "Seeds (default: --seed)")->delimiter(',');
  abl->add_option("--out", ablate_out, "Directory for ablation.txt and ablation.json");
  mf.add(abl);
  tf.add(abl);

  fs::path export_out = "embeddings.tsv";
  auto* exp = sub("export-embeddings", "Write final gene and disease embeddings as TSV");
  exp->add_option("--data", data, "Data directory")->required();
  exp->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  exp->add_option("--out", export_out, "Output TSV file")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto parsed = app.get_subcommands();
    err << (parsed.empty() ? app.help() : parsed.front()->help());
    return kExitUsage;
  }

  set_num_threads(common.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : common.threads);
  Context ctx{out, err, common};
  auto* chosen = app.get_subcommands().front();
  try {
    if (chosen != train && chosen != abl && chosen != eval)
      out << "config_fingerprint " << fingerprint_text(chosen->get_name() + "\n" + chosen->config_to_str(true, false))
          << "\n";
    if (chosen == build) return cmd_build_graph(ctx, data, out_dir_flag);
    if (chosen == stats) return cmd_stats(ctx, data, stats_json_flag, cap);
    if (chosen == enumerate) return cmd_enumerate(ctx, data, schema_names, node_label, cap, list);
    if (chosen == synth) return cmd_synth(ctx, sc, out_dir_flag);
    if (chosen == train) return cmd_train(ctx, data, mf, tf, out_dir_flag);
    if (chosen == eval) return cmd_eval(ctx, data, checkpoint, tf, report_path);
    if (chosen == abl) return cmd_ablate(ctx, data, mf, tf, axis, values, seeds, ablate_out);
    if (chosen == exp) return cmd_export(ctx, data, checkpoint, export_out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace comet::cli
