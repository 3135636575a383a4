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

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "gnneval/graph.hpp"
#include "gnneval/rng.hpp"

namespace gnneval {

enum class AugmentOp { EdgeDrop = 0, Subgraph = 1, AttrMask = 2, NodeMix = 3 };

inline constexpr std::array<AugmentOp, 4> kAllAugmentOps = {
    AugmentOp::EdgeDrop, AugmentOp::Subgraph, AugmentOp::AttrMask, AugmentOp::NodeMix};

std::string_view augment_op_name(AugmentOp op);
AugmentOp parse_augment_op(std::string_view name);

/// Restart probability of the random walk used by subgraph_sample.
inline constexpr double kWalkRestart = 0.15;

/// Induced subgraph on val_ids and test_ids, the nodes not used to fit the classifier.
Graph seed_subgraph(const Graph& g, const Split& split);

/// Removes exactly round(p * M) distinct edges chosen uniformly.
Graph edge_drop(const Graph& g, double p, Rng& rng);

/// Node ids (sorted) kept by subgraph_sample: round((1 - p) * N) nodes
/// collected by a random walk with restart from a uniform start node.
/// When the walk stops finding new nodes, a uniform unvisited node is added
/// and becomes the new restart point.
std::vector<NodeId> subgraph_sample_ids(const Graph& g, double p, Rng& rng);
Graph subgraph_sample(const Graph& g, double p, Rng& rng);

/// Zeroes the feature rows of exactly round(p * N) uniformly chosen nodes.
Graph attr_mask(const Graph& g, double p, Rng& rng);

/// For round(p * N) distinct target nodes u: x_u <- lam x_u + (1 - lam) x_v with
/// a uniform partner v != u and lam ~ U[0.5, 1). Partners are read from the
/// input features, so the result does not depend on processing order.
Graph node_mix(const Graph& g, double p, Rng& rng);

Graph apply_augment(AugmentOp op, const Graph& g, double p, Rng& rng);

struct AugmentConfig {
  /// Sampling weights over EdgeDrop, Subgraph, AttrMask, NodeMix.
  std::array<double, 4> weights{1.0, 1.0, 1.0, 1.0};
  /// Per-operator [lo, hi] range for the ratio p.
  std::array<std::array<double, 2>, 4> p_ranges{{{0.1, 0.9}, {0.1, 0.9}, {0.1, 0.9}, {0.1, 0.9}}};
  std::size_t num_graphs = 400;
  std::uint64_t seed = 0;
  std::size_t chain_length = 1;

  void validate() const;
};

struct MetaGraph {
  Graph graph;
  std::vector<AugmentOp> ops;
  std::vector<double> ratios;
  /// Key of the rng stream this graph was drawn from.
  std::uint64_t stream_key = 0;
  std::size_t index = 0;
};

/// K meta-graphs; graph i uses the stream Rng(cfg.seed).split(i), so the
/// result does not depend on evaluation order or thread count.
std::vector<MetaGraph> build_meta_set(const Graph& seed_graph, const AugmentConfig& cfg,
                                      unsigned threads = 1);

/// Single meta-graph i of the set (what build_meta_set computes per index).
MetaGraph build_meta_graph(const Graph& seed_graph, const AugmentConfig& cfg, std::size_t index);

}  // namespace gnneval
