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

#include <compare>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gnneval/rng.hpp"
#include "gnneval/tensor.hpp"

namespace gnneval {

using NodeId = std::int32_t;
inline constexpr int kUnlabeled = -1;

/// Undirected edge in canonical orientation (src < dst).
struct Edge {
  NodeId src = 0;
  NodeId dst = 0;
  auto operator<=>(const Edge&) const = default;
};

/// Immutable undirected, unweighted attributed graph.
///
/// Edges are kept once each as (min, max), sorted lexicographically; the CSR
/// view lists both directions. Labels are in [0, C) or kUnlabeled.
class Graph {
 public:
  Graph() = default;

  /// Validates and canonicalizes. Throws InvalidArgument on self-loops,
  /// duplicate edges, out-of-range endpoints or labels, or shape mismatch.
  /// Edges may be given in either orientation.
  Graph(Tensor2 features, std::vector<int> labels, std::vector<Edge> edges, int num_classes);

  std::size_t num_nodes() const { return labels_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  std::size_t feature_dim() const { return static_cast<std::size_t>(features_.cols()); }
  int num_classes() const { return num_classes_; }

  const Tensor2& features() const { return features_; }
  std::span<const int> labels() const { return labels_; }
  std::span<const Edge> edges() const { return edges_; }

  std::span<const NodeId> neighbors(NodeId u) const {
    return {adj_.data() + offsets_[u], adj_.data() + offsets_[u + 1]};
  }
  std::size_t degree(NodeId u) const { return offsets_[u + 1] - offsets_[u]; }

  /// True iff every node carries a label in [0, C).
  bool fully_labeled() const;

  Graph with_features(Tensor2 features) const;
  Graph with_edges(std::vector<Edge> edges) const;
  Graph with_labels(std::vector<int> labels) const;
  /// Copy with every label replaced by kUnlabeled.
  Graph without_labels() const;

  /// Structural equality: features bit-identical, labels, edges, class count.
  bool operator==(const Graph& other) const;

 private:
  void build_csr();

  Tensor2 features_;
  std::vector<int> labels_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeId> adj_;
  int num_classes_ = 0;
};

/// Disjoint train/val/test node-id lists, each sorted.
struct Split {
  std::vector<NodeId> train_ids;
  std::vector<NodeId> val_ids;
  std::vector<NodeId> test_ids;

  /// Throws InvalidArgument unless the lists are sorted, unique, pairwise
  /// disjoint and within [0, num_nodes).
  void validate(std::size_t num_nodes) const;
};

/// Reads a gtxt v1 file. Throws FormatError with the offending line number.
Graph load_graph(const std::filesystem::path& path);
Graph parse_graph(const std::string& text);

/// Writes gtxt v1 (features with 9 significant digits).
void save_graph(const Graph& g, const std::filesystem::path& path);
std::string format_graph(const Graph& g);

Split load_split(const std::filesystem::path& path);
void save_split(const Split& split, const std::filesystem::path& path);

/// Random split with the given train/val fractions; the rest is test.
Split random_split(std::size_t num_nodes, double train_fraction, double val_fraction, Rng& rng);

/// Subgraph on sorted, unique ids; node k of the result is ids[k].
Graph induced_subgraph(const Graph& g, std::span<const NodeId> ids);

struct SbmBlock {
  std::size_t size = 0;
  int class_id = 0;
};

struct SbmParams {
  std::vector<SbmBlock> blocks;
  double p_in = 0.0;
  double p_out = 0.0;
  /// One mean vector per class id; all the same length d.
  std::vector<std::vector<double>> feature_means;
  double feature_noise = 1.0;
};

/// Stochastic block model with Gaussian class-mean features. Nodes are laid
/// out block by block. Features are rounded to 9 significant digits so that
/// the generated graph survives a gtxt round-trip unchanged.
Graph generate_sbm(std::uint64_t seed, const SbmParams& params);

/// 64-bit FNV-1a over the canonical gtxt serialization, as 16 hex digits.
std::string graph_fingerprint(const Graph& g);

/// Scans all invariants; returns an empty string when valid, else a description.
std::string check_graph_invariants(const Graph& g);

}  // namespace gnneval
