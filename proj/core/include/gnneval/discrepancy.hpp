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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gnneval/augment.hpp"
#include "gnneval/graph.hpp"
#include "gnneval/models.hpp"

namespace gnneval {

/// Meta-graph (or target graph) re-attributed with discrepancy features.
///
/// attrs is M x N: row u belongs to node u of this graph, column v to node v
/// of the classifier's training graph. The structure is the source graph's.
struct DiscGraph {
  Tensor2 attrs;
  std::size_t num_nodes = 0;
  std::vector<Edge> edges;
  std::optional<double> label;
  std::string model_id;
  std::string train_graph_id;
  /// "meta:<index>" or "target:<name>".
  std::string provenance;
  /// Rows or columns whose embedding had zero norm.
  std::size_t degenerate_rows = 0;

  std::size_t train_node_count() const { return static_cast<std::size_t>(attrs.cols()); }
  bool operator==(const DiscGraph&) const = default;
};

enum class DiscNorm {
  /// Per-pair cosine similarity (default).
  RowCosine,
  /// Whole-matrix Frobenius norms in the denominator, kept for comparison.
  MatrixNorm,
};

/// out[u][v] = <z_meta[u], z_train[v]> / (|z_meta[u]| |z_train[v]|), clamped to
/// [-1, 1]. Zero-norm rows use 1e-12 as their norm and are counted in
/// `degenerate` when given.
Tensor2 disc_attrs(const Tensor2& z_meta, const Tensor2& z_train,
                   std::size_t* degenerate = nullptr, DiscNorm norm = DiscNorm::RowCosine);

/// Classifier accuracy on a fully labeled meta-graph.
double label_meta(const TrainedModel& model, const MetaGraph& mg);

/// A trained classifier bound to its training graph, with the training-graph
/// embedding computed once. Every DiscGraph of one model is built against
/// the same cached embedding, which fixes the column order.
class DiscrepancyContext {
 public:
  /// Throws InvalidArgument if the model was not trained on `train_graph`.
  DiscrepancyContext(const TrainedModel& model, const Graph& train_graph,
                     DiscNorm norm = DiscNorm::RowCosine);

  const TrainedModel& model() const { return *model_; }
  const Tensor2& train_embedding() const { return z_train_; }
  const std::string& train_graph_id() const { return train_graph_id_; }
  std::size_t train_node_count() const { return static_cast<std::size_t>(z_train_.rows()); }
  DiscNorm norm() const { return norm_; }

 private:
  const TrainedModel* model_;
  Tensor2 z_train_;
  std::string train_graph_id_;
  DiscNorm norm_;
};

/// Labeled DiscGraph of one meta-graph.
DiscGraph build_discgraph(const DiscrepancyContext& ctx, const MetaGraph& mg);
DiscGraph build_discgraph(const TrainedModel& model, const Graph& train_graph, const MetaGraph& mg);

/// Unlabeled DiscGraph of an unseen graph. Target labels are never read.
DiscGraph build_inference_discgraph(const DiscrepancyContext& ctx, const Graph& target,
                                    const std::string& target_name = "target");
DiscGraph build_inference_discgraph(const TrainedModel& model, const Graph& train_graph,
                                    const Graph& target);

std::vector<DiscGraph> build_disc_set(const DiscrepancyContext& ctx,
                                      const std::vector<MetaGraph>& metas, unsigned threads = 1);

/// `#disc v1` text: header "M N label|NA", a "bound <model-id> <graph-id>
/// <provenance>" line, M attribute rows (9 significant digits), then one
/// "src dst" line per edge.
std::string format_disc(const DiscGraph& d);
DiscGraph parse_disc(const std::string& text);
void save_disc(const DiscGraph& d, const std::filesystem::path& path);
DiscGraph load_disc(const std::filesystem::path& path);

}  // namespace gnneval
