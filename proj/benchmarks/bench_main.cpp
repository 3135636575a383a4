// Copyright 2026 The gnneval Authors.
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

// Microbenchmarks for the hot paths of a desk-scale run.

#include <benchmark/benchmark.h>

#include <algorithm>
#include <vector>

#include "gnneval/discrepancy.hpp"
#include "gnneval/evaluator.hpp"
#include "gnneval/graph.hpp"
#include "gnneval/models.hpp"
#include "gnneval/rng.hpp"

namespace {

using namespace gnneval;

Graph sbm(std::size_t nodes, std::size_t dim) {
  SbmParams p;
  for (int c = 0; c < 3; ++c) p.blocks.push_back({nodes / 3, c});
  p.p_in = 0.03;
  p.p_out = 0.012;
  Rng rng(7);
  for (int c = 0; c < 3; ++c) {
    std::vector<double> mu(dim);
    for (auto& m : mu) m = 0.7 * rng.normal();
    p.feature_means.push_back(std::move(mu));
  }
  return generate_sbm(11, p);
}

Tensor2 random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Rng rng(seed);
  Tensor2 m(rows, cols);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = rng.normal();
  return m;
}

void BM_Spmm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Graph g = sbm(n, 16);
  const SparseAdj a = normalized_adjacency(g);
  const Tensor2 x = random_matrix(a.cols(), 128, 1);
  for (auto _ : state) {
    Tensor2 y = a * x;
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * a.nonZeros() * 128);
}
BENCHMARK(BM_Spmm)->Arg(600)->Arg(3000);

void BM_GcnForward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Graph g = sbm(n, 16);
  Rng rng(3);
  const Split split = random_split(n, 0.4, 0.3, rng);
  ModelConfig cfg = default_model_config(Arch::GCN, 16, 3, 0);
  cfg.max_epochs = 1;
  const TrainedModel model = train_classifier(g, split, cfg);
  for (auto _ : state) {
    Prediction p = embed_and_predict(model, g);
    benchmark::DoNotOptimize(p.logits.data());
  }
}
BENCHMARK(BM_GcnForward)->Arg(600)->Arg(3000)->Unit(benchmark::kMicrosecond);

void BM_DiscAttrs(benchmark::State& state) {
  const Tensor2 z_meta = random_matrix(state.range(0), 16, 1);
  const Tensor2 z_train = random_matrix(600, 16, 2);
  for (auto _ : state) {
    Tensor2 d = disc_attrs(z_meta, z_train);
    benchmark::DoNotOptimize(d.data());
  }
}
BENCHMARK(BM_DiscAttrs)->Arg(360)->Arg(2000)->Unit(benchmark::kMicrosecond);

// Batch assembly plus one full-batch Adam step over `count` DiscGraphs of width 600.
void BM_EvaluatorEpoch(benchmark::State& state) {
  const auto count = static_cast<std::size_t>(state.range(0));
  Rng rng(5);
  std::vector<DiscGraph> discs;
  for (std::size_t i = 0; i < count; ++i) {
    DiscGraph d;
    d.num_nodes = 300;
    d.attrs = random_matrix(300, 600, 100 + i).cwiseMax(-1.0).cwiseMin(1.0);
    for (NodeId u = 0; u + 1 < 300; ++u) d.edges.push_back({u, u + 1});
    d.label = rng.uniform();
    d.model_id = "gcn-s0-bench";
    d.train_graph_id = "0000000000000000";
    d.provenance = "meta:" + std::to_string(i);
    discs.push_back(std::move(d));
  }
  EvaluatorConfig cfg;
  cfg.epochs = 1;
  cfg.val_fraction = 0.0;
  for (auto _ : state) {
    TrainedEvaluator ev = train_evaluator(discs, cfg);
    benchmark::DoNotOptimize(&ev);
  }
}
BENCHMARK(BM_EvaluatorEpoch)->Arg(10)->Arg(90)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
