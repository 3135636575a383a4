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
// Independent reference implementations used as test oracles. Nothing here
// calls into the library's numeric kernels.

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <cstdint>
#include <set>
#include <utility>
#include <vector>

#include "gnneval/discrepancy.hpp"
#include "gnneval/graph.hpp"
#include "gnneval/rng.hpp"
#include "gnneval/tensor.hpp"

namespace gnneval::testing {

inline Tensor2 random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double scale = 1.0) {
  Tensor2 m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.normal();
  return m;
}

// Erdos-Renyi graph with features and labels in [0, classes). Features are
// rounded to 9 significant digits so text round-trips are exact.
inline Graph random_graph(std::size_t n, double p, std::size_t dim, int classes, Rng& rng) {
  std::vector<Edge> edges;
  for (NodeId u = 0; u < static_cast<NodeId>(n); ++u) {
    for (NodeId v = u + 1; v < static_cast<NodeId>(n); ++v) {
      if (rng.uniform() < p) edges.push_back({u, v});
    }
  }
  Tensor2 x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    x.data()[i] = std::stod(std::to_string(static_cast<float>(rng.normal())));
  }
  std::vector<int> labels(n);
  for (auto& y : labels) y = static_cast<int>(rng.below(static_cast<std::uint64_t>(classes)));
  return Graph(std::move(x), std::move(labels), std::move(edges), classes);
}

// Dense D^-1/2 (A + I) D^-1/2.
inline Eigen::MatrixXd dense_gcn_norm(std::size_t n, const std::vector<std::pair<NodeId, NodeId>>& edges) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (auto [u, v] : edges) {
    a(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v)) = 1.0;
    a(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(u)) = 1.0;
  }
  Eigen::VectorXd d = a.rowwise().sum();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) /= std::sqrt(d(i) * d(j));
  }
  return a;
}

inline std::vector<std::pair<NodeId, NodeId>> edge_pairs(const Graph& g) {
  std::vector<std::pair<NodeId, NodeId>> out;
  for (const auto& e : g.edges()) out.emplace_back(e.src, e.dst);
  return out;
}

// Brute-force induced edge count.
inline std::size_t count_induced_edges(const Graph& g, const std::vector<NodeId>& ids) {
  const std::set<NodeId> keep(ids.begin(), ids.end());
  std::size_t m = 0;
  for (const auto& e : g.edges()) m += (keep.count(e.src) && keep.count(e.dst)) ? 1 : 0;
  return m;
}

inline std::size_t count_zero_rows(const Tensor2& x) {
  std::size_t z = 0;
  for (Eigen::Index r = 0; r < x.rows(); ++r) z += x.row(r).isZero(0.0) ? 1 : 0;
  return z;
}

// Relabel nodes: new id of old node u is perm[u].
inline Graph permute_graph(const Graph& g, const std::vector<NodeId>& perm) {
  Tensor2 x(g.features().rows(), g.features().cols());
  std::vector<int> labels(g.num_nodes());
  for (NodeId u = 0; u < static_cast<NodeId>(g.num_nodes()); ++u) {
    x.row(static_cast<Eigen::Index>(perm[u])) = g.features().row(static_cast<Eigen::Index>(u));
    labels[perm[u]] = g.labels()[u];
  }
  std::vector<Edge> edges;
  for (const auto& e : g.edges()) {
    const NodeId a = perm[e.src], b = perm[e.dst];
    edges.push_back({std::min(a, b), std::max(a, b)});
  }
  return Graph(std::move(x), std::move(labels), std::move(edges), g.num_classes());
}

inline std::vector<NodeId> random_permutation(std::size_t n, Rng& rng) {
  std::vector<NodeId> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
  return perm;
}

// Labeled DiscGraphs whose attributes drift with the label, the way real
// discrepancy attributes rise with accuracy. Labels are distinct.
inline std::vector<DiscGraph> synthetic_disc_set(std::size_t count, std::size_t width,
                                                 std::uint64_t seed) {
  Rng rng(seed);
  std::vector<DiscGraph> out;
  for (std::size_t i = 0; i < count; ++i) {
    DiscGraph d;
    const double y = 0.1 + 0.8 * static_cast<double>(i) / static_cast<double>(count);
    d.num_nodes = 8 + rng.below(8);
    d.attrs.resize(static_cast<Eigen::Index>(d.num_nodes), static_cast<Eigen::Index>(width));
    for (Eigen::Index k = 0; k < d.attrs.size(); ++k) {
      d.attrs.data()[k] = std::clamp(2.0 * y - 1.0 + 0.3 * rng.normal(), -1.0, 1.0);
    }
    for (NodeId u = 0; u + 1 < static_cast<NodeId>(d.num_nodes); ++u) {
      d.edges.push_back({u, u + 1});
      if (rng.uniform() < 0.3 && u + 2 < static_cast<NodeId>(d.num_nodes)) d.edges.push_back({u, u + 2});
    }
    d.label = y;
    d.model_id = "gcn-s0-synthetic";
    d.train_graph_id = "0000000000000000";
    d.provenance = "meta:" + std::to_string(i);
    out.push_back(std::move(d));
  }
  return out;
}

// Same DiscGraph with node u renamed perm[u].
inline DiscGraph permute_disc(const DiscGraph& d, const std::vector<NodeId>& perm) {
  DiscGraph out = d;
  for (std::size_t u = 0; u < d.num_nodes; ++u) {
    out.attrs.row(static_cast<Eigen::Index>(perm[u])) = d.attrs.row(static_cast<Eigen::Index>(u));
  }
  out.edges.clear();
  for (const auto& e : d.edges) {
    const NodeId a = perm[static_cast<std::size_t>(e.src)], b = perm[static_cast<std::size_t>(e.dst)];
    out.edges.push_back({std::min(a, b), std::max(a, b)});
  }
  std::sort(out.edges.begin(), out.edges.end());
  return out;
}

}  // namespace gnneval::testing
