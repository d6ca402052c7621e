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

#include <benchmark/benchmark.h>

#include <random>

#include "comet/autodiff/ops.hpp"
#include "comet/metapath.hpp"
#include "comet/metrics.hpp"
#include "comet/model.hpp"
#include "comet/parallel.hpp"
#include "comet/synthbench.hpp"
#include "comet/trainer.hpp"

namespace {

using namespace comet;

const SynthDataset& planted() {
  static const SynthDataset data = generate(SynthConfig{});
  return data;
}

ad::Tensor random_tensor(ad::Shape shape, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(ad::numel(shape));
  for (auto& x : v) x = u(rng);
  return ad::Tensor::from(std::move(shape), std::move(v));
}

void BM_EnumerateGDG(benchmark::State& state) {
  const auto& g = planted().graph;
  std::uint64_t total = 0;
  for (auto _ : state) {
    for (std::uint32_t i = 0; i < g.node_count(NodeType::Gene); ++i)
      total += enumerate_instances(g, SchemaId::GDG, {NodeType::Gene, i}).size();
  }
  benchmark::DoNotOptimize(total);
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * g.node_count(NodeType::Gene)));
}
BENCHMARK(BM_EnumerateGDG)->Unit(benchmark::kMillisecond);

void BM_SampleInstancePlan(benchmark::State& state) {
  const auto& g = planted().graph;
  set_num_threads(static_cast<std::size_t>(state.range(0)));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(build_instance_plan(g, NodeType::Gene, {}, kDefaultInstanceCap, ++seed));
  set_num_threads(1);
}
BENCHMARK(BM_SampleInstancePlan)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_tensor({n, n}, 1), b = random_tensor({n, n}, 2);
  for (auto _ : state) benchmark::DoNotOptimize(ad::matmul(a, b));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(16)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);

void BM_SegmentSoftmax(benchmark::State& state) {
  const std::size_t rows = 20000, segments = 200;
  const auto x = random_tensor({rows, 4}, 3);
  std::vector<std::uint32_t> seg(rows);
  for (std::size_t i = 0; i < rows; ++i) seg[i] = static_cast<std::uint32_t>(i % segments);
  for (auto _ : state) benchmark::DoNotOptimize(ad::segment_softmax(x, seg, segments));
}
BENCHMARK(BM_SegmentSoftmax)->Unit(benchmark::kMicrosecond);

void BM_Forward(benchmark::State& state) {
  const auto& g = planted().graph;
  ModelConfig c;
  c.encoder = static_cast<EncoderMode>(state.range(0));
  CometModel model(c, g);
  const auto plan = build_forward_plan(g, model.config(), 1);
  for (auto _ : state) benchmark::DoNotOptimize(model.forward(g, plan));
  state.SetLabel(std::string(name(c.encoder)));
}
BENCHMARK(BM_Forward)->Arg(0)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_TrainEpoch(benchmark::State& state) {
  const auto& d = planted();
  ModelConfig mc;
  TrainConfig tc;
  tc.epochs = 1;
  CometModel model(mc, d.graph);
  const auto data = prepare_training(d.graph, model.config(), tc, d.heldout);
  Adam opt(tc);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(train_epoch(model, opt, data, tc, ++seed));
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond)->Iterations(1);

void BM_AucRoc(benchmark::State& state) {
  Rng rng(5);
  std::normal_distribution<double> z;
  ScoredPairs p;
  for (std::int64_t i = 0; i < state.range(0); ++i) p.push(z(rng) + (i % 2), static_cast<int>(i % 2));
  for (auto _ : state) benchmark::DoNotOptimize(full_report(p));
}
BENCHMARK(BM_AucRoc)->Arg(1000)->Arg(100000)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
