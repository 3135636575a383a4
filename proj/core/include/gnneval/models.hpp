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

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gnneval/graph.hpp"
#include "gnneval/tape.hpp"

namespace gnneval {

enum class Arch { GCN, SAGE, GAT, GIN, MLP };

inline constexpr Arch kAllArchs[] = {Arch::GCN, Arch::SAGE, Arch::GAT, Arch::GIN, Arch::MLP};

std::string_view arch_name(Arch arch);
/// Accepts the canonical names (case-insensitive); throws InvalidArgument otherwise.
Arch parse_arch(std::string_view name);

struct ModelConfig {
  Arch arch = Arch::GCN;
  int num_layers = 2;
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 128;
  std::size_t out_embed_dim = 16;
  int num_classes = 0;
  double lr = 0.01;
  double wd = 1e-5;
  int max_epochs = 200;
  int patience = 20;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Per-architecture learning rate and weight decay used for the citation
/// benchmarks (GCN 0.01/1e-5, SAGE 0.005/1e-6, GAT 0.005/1e-6, GIN 0.01/1e-6,
/// MLP 0.001/1e-5), 2 layers, hidden 128, embedding 16.
ModelConfig default_model_config(Arch arch, std::size_t input_dim, int num_classes,
                                 std::uint64_t seed);

/// Sparse propagation operators derived once per graph.
struct GraphOperators {
  std::shared_ptr<const SparseAdj> gcn;       // D^-1/2 (A + I) D^-1/2
  std::shared_ptr<const SparseAdj> mean_nbr;  // row-normalized A, empty rows for isolated nodes
  std::shared_ptr<const SparseAdj> self_sum;  // A + I, unit weights; GIN sum and GAT pattern

  static GraphOperators from(const Graph& g);
};

/// Symmetric GCN normalization with self-loops: D^-1/2 (A + I) D^-1/2,
/// D the degree matrix of A + I.
SparseAdj normalized_adjacency(const Graph& g);
/// Same, for a bare canonical edge list over num_nodes nodes.
SparseAdj normalized_adjacency(std::size_t num_nodes, std::span<const Edge> edges);

enum class LayerKind { Dense, GcnConv, SageConv, GatConv, GinConv };

LayerKind conv_kind(Arch arch);

/// Adds the parameters of one layer under `prefix` (e.g. "conv1").
void init_layer(ParamStore& params, LayerKind kind, const std::string& prefix, std::size_t in,
                std::size_t out, Rng& rng);

/// Records one layer on the tape. Graph layers read the operators; Dense ignores them.
///   Dense: xW + b
///   GcnConv: A_hat x W + b
///   SageConv: [x, mean_nbr(x)] W + b
///   GatConv: attention(xW) + b, LeakyReLU(0.2) logits, one head, self included
///   GinConv: MLP(x + sum_nbr(x)), MLP = dense -> ReLU -> dense
Var layer_forward(Tape& tape, LayerKind kind, const std::string& prefix,
                  const GraphOperators& ops, Var x);

inline constexpr double kGatSlope = 0.2;

/// Fresh Glorot-initialized classifier parameters, deterministic in cfg.seed.
ParamStore init_classifier(const ModelConfig& cfg);

struct ClassifierVars {
  Var embedding;  // N x out_embed_dim, pre-head
  Var logits;     // N x C
};

/// conv1 -> ReLU -> conv2 (embedding) -> dense head (logits).
ClassifierVars classifier_forward(Tape& tape, const ModelConfig& cfg, const GraphOperators& ops,
                                  Var x);

/// A frozen node classifier together with the graph it was fitted on.
class TrainedModel {
 public:
  TrainedModel(ModelConfig config, ParamStore params, std::string source_graph_id,
               double best_val_accuracy = 0.0, int best_epoch = 0);

  const ModelConfig& config() const { return config_; }
  const ParamStore& params() const { return params_; }
  const std::string& source_graph_id() const { return source_graph_id_; }
  double best_val_accuracy() const { return best_val_accuracy_; }
  int best_epoch() const { return best_epoch_; }
  /// "<arch>-s<seed>-<hash>", hash over the serialized checkpoint.
  const std::string& id() const { return id_; }

 private:
  ModelConfig config_;
  ParamStore params_;
  std::string source_graph_id_;
  double best_val_accuracy_;
  int best_epoch_;
  std::string id_;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_accuracy = 0.0;
};

/// Full-graph (transductive) training with softmax cross-entropy on the
/// train nodes. Keeps the parameters with the best validation accuracy
/// (earliest on ties) and stops after `patience` epochs without improvement.
TrainedModel train_classifier(const Graph& g, const Split& split, const ModelConfig& cfg,
                              std::vector<EpochRecord>* history = nullptr);

struct Prediction {
  Tensor2 embedding;        // N x out_embed_dim
  Tensor2 logits;           // N x C
  std::vector<int> labels;  // argmax of logits
};

Prediction embed_and_predict(const TrainedModel& model, const Graph& g);

/// Fraction of positions where yhat == y. y must not contain kUnlabeled.
double accuracy(std::span<const int> yhat, std::span<const int> y);

std::string format_model(const TrainedModel& model);
TrainedModel parse_model(const std::string& text);
void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace gnneval
