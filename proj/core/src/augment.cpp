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

#include "gnneval/augment.hpp"

#include <algorithm>
#include <cmath>

#include "gnneval/error.hpp"
#include "parallel.hpp"

namespace gnneval {

std::string_view augment_op_name(AugmentOp op) {
  switch (op) {
    case AugmentOp::EdgeDrop: return "EdgeDrop";
    case AugmentOp::Subgraph: return "Subgraph";
    case AugmentOp::AttrMask: return "AttrMask";
    case AugmentOp::NodeMix: return "NodeMix";
  }
  return "?";
}

AugmentOp parse_augment_op(std::string_view name) {
  for (AugmentOp op : kAllAugmentOps) {
    if (augment_op_name(op) == name) return op;
  }
  throw InvalidArgument("unknown augmentation '" + std::string(name) + "'");
}

namespace {

void check_ratio(double p, const char* op) {
  if (!(p > 0.0 && p < 1.0)) {
    throw InvalidArgument(std::string(op) + ": ratio must lie in (0, 1), got " + std::to_string(p));
  }
}

std::size_t rounded(double x) { return static_cast<std::size_t>(std::llround(x)); }

}  // namespace

Graph seed_subgraph(const Graph& g, const Split& split) {
  split.validate(g.num_nodes());
  std::vector<NodeId> ids;
  ids.reserve(split.val_ids.size() + split.test_ids.size());
  std::merge(split.val_ids.begin(), split.val_ids.end(), split.test_ids.begin(),
             split.test_ids.end(), std::back_inserter(ids));
  if (ids.empty()) throw InvalidArgument("seed_subgraph: val and test sets are both empty");
  return induced_subgraph(g, ids);
}

Graph edge_drop(const Graph& g, double p, Rng& rng) {
  check_ratio(p, "edge_drop");
  const std::size_t m = g.num_edges();
  const std::size_t drop = std::min(m, rounded(p * static_cast<double>(m)));
  std::vector<char> removed(m, 0);
  for (std::size_t k : rng.sample_without_replacement(m, drop)) removed[k] = 1;
  std::vector<Edge> kept;
  kept.reserve(m - drop);
  const auto edges = g.edges();
  for (std::size_t k = 0; k < m; ++k) {
    if (!removed[k]) kept.push_back(edges[k]);
  }
  return g.with_edges(std::move(kept));
}

std::vector<NodeId> subgraph_sample_ids(const Graph& g, double p, Rng& rng) {
  check_ratio(p, "subgraph_sample");
  const std::size_t n = g.num_nodes();
  const std::size_t target = std::min(n, rounded((1.0 - p) * static_cast<double>(n)));
  if (target == 0) throw InvalidArgument("subgraph_sample: target size is 0");

  std::vector<char> visited(n, 0);
  std::vector<NodeId> ids;
  ids.reserve(target);
  auto visit = [&](NodeId u) {
    if (!visited[u]) {
      visited[u] = 1;
      ids.push_back(u);
    }
  };
  auto random_unvisited = [&]() {
    auto k = rng.below(n - ids.size());
    for (std::size_t u = 0; u < n; ++u) {
      if (!visited[u] && k-- == 0) return static_cast<NodeId>(u);
    }
    return static_cast<NodeId>(-1);
  };

  // A walk that has found nothing new for this many steps counts as stalled.
  const std::size_t stall_limit = 10 * std::max<std::size_t>(target, 10);
  NodeId start = static_cast<NodeId>(rng.below(n));
  NodeId cur = start;
  visit(start);
  std::size_t since_new = 0;
  while (ids.size() < target) {
    const auto nb = g.neighbors(cur);
    if (nb.empty() || rng.uniform() < kWalkRestart) {
      cur = start;
    } else {
      cur = nb[rng.below(nb.size())];
    }
    const std::size_t before = ids.size();
    visit(cur);
    since_new = ids.size() > before ? 0 : since_new + 1;
    if (since_new >= stall_limit) {
      start = random_unvisited();
      cur = start;
      visit(start);
      since_new = 0;
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

Graph subgraph_sample(const Graph& g, double p, Rng& rng) {
  const auto ids = subgraph_sample_ids(g, p, rng);
  return induced_subgraph(g, ids);
}

Graph attr_mask(const Graph& g, double p, Rng& rng) {
  check_ratio(p, "attr_mask");
  const std::size_t n = g.num_nodes();
  const std::size_t count = std::min(n, rounded(p * static_cast<double>(n)));
  Tensor2 x = g.features();
  for (std::size_t u : rng.sample_without_replacement(n, count)) {
    x.row(static_cast<Eigen::Index>(u)).setZero();
  }
  return g.with_features(std::move(x));
}

Graph node_mix(const Graph& g, double p, Rng& rng) {
  check_ratio(p, "node_mix");
  const std::size_t n = g.num_nodes();
  if (n < 2) throw InvalidArgument("node_mix: needs at least 2 nodes");
  const std::size_t count = std::min(n, rounded(p * static_cast<double>(n)));
  const Tensor2& src = g.features();
  Tensor2 x = src;
  for (std::size_t u : rng.sample_without_replacement(n, count)) {
    std::size_t v = rng.below(n - 1);
    if (v >= u) ++v;
    const double lam = rng.uniform(0.5, 1.0);
    const auto ui = static_cast<Eigen::Index>(u);
    x.row(ui) = lam * src.row(ui) + (1.0 - lam) * src.row(static_cast<Eigen::Index>(v));
  }
  return g.with_features(std::move(x));
}

Graph apply_augment(AugmentOp op, const Graph& g, double p, Rng& rng) {
  switch (op) {
    case AugmentOp::EdgeDrop: return edge_drop(g, p, rng);
    case AugmentOp::Subgraph: return subgraph_sample(g, p, rng);
    case AugmentOp::AttrMask: return attr_mask(g, p, rng);
    case AugmentOp::NodeMix: return node_mix(g, p, rng);
  }
  throw InvalidArgument("apply_augment: unknown operator");
}

void AugmentConfig::validate() const {
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw InvalidArgument("augment weights must be >= 0");
    total += w;
  }
  if (!(total > 0.0)) throw InvalidArgument("augment weights must not all be zero");
  for (const auto& r : p_ranges) {
    if (!(r[0] > 0.0 && r[0] <= r[1] && r[1] < 1.0)) {
      throw InvalidArgument("augment ratio ranges must satisfy 0 < lo <= hi < 1");
    }
  }
  if (num_graphs == 0) throw InvalidArgument("number of meta-graphs must be positive");
  if (chain_length == 0) throw InvalidArgument("chain_length must be positive");
}

MetaGraph build_meta_graph(const Graph& seed_graph, const AugmentConfig& cfg, std::size_t index) {
  Rng rng = Rng(cfg.seed).split(index);
  MetaGraph mg{seed_graph, {}, {}, rng.key(), index};
  for (std::size_t step = 0; step < cfg.chain_length; ++step) {
    const auto op = static_cast<AugmentOp>(rng.categorical(cfg.weights));
    const auto& range = cfg.p_ranges[static_cast<std::size_t>(op)];
    const double p = range[0] == range[1] ? range[0] : rng.uniform(range[0], range[1]);
    try {
      mg.graph = apply_augment(op, mg.graph, p, rng);
    } catch (const std::exception& e) {
      throw InvalidArgument("meta-graph " + std::to_string(index) + ": " + e.what());
    }
    mg.ops.push_back(op);
    mg.ratios.push_back(p);
  }
  return mg;
}

std::vector<MetaGraph> build_meta_set(const Graph& seed_graph, const AugmentConfig& cfg,
                                      unsigned threads) {
  cfg.validate();
  if (!seed_graph.fully_labeled()) throw InvalidArgument("seed graph must be fully labeled");
  std::vector<MetaGraph> out(cfg.num_graphs);
  detail::parallel_for(cfg.num_graphs, threads,
                       [&](std::size_t i) { out[i] = build_meta_graph(seed_graph, cfg, i); });
  return out;
}

}  // namespace gnneval
