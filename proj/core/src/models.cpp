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

#include "gnneval/models.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "gnneval/error.hpp"
#include "gnneval/optim.hpp"
#include "text_io.hpp"

namespace gnneval {

std::string_view arch_name(Arch arch) {
  switch (arch) {
    case Arch::GCN: return "GCN";
    case Arch::SAGE: return "SAGE";
    case Arch::GAT: return "GAT";
    case Arch::GIN: return "GIN";
    case Arch::MLP: return "MLP";
  }
  return "?";
}

Arch parse_arch(std::string_view name) {
  std::string up(name);
  std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
  if (up == "GRAPHSAGE") up = "SAGE";
  for (Arch a : kAllArchs) {
    if (arch_name(a) == up) return a;
  }
  throw InvalidArgument("unknown architecture '" + std::string(name) + "'");
}

void ModelConfig::validate() const {
  if (num_layers != 2) throw InvalidArgument("only 2-layer classifiers are supported");
  if (input_dim == 0 || hidden_dim == 0 || out_embed_dim == 0 || num_classes <= 0) {
    throw InvalidArgument("model dimensions must be positive");
  }
  if (max_epochs < 0 || patience < 0) throw InvalidArgument("epochs/patience must be >= 0");
  if (!(lr >= 0) || !(wd >= 0)) throw InvalidArgument("lr and wd must be >= 0");
}

ModelConfig default_model_config(Arch arch, std::size_t input_dim, int num_classes,
                                 std::uint64_t seed) {
  ModelConfig cfg;
  cfg.arch = arch;
  cfg.input_dim = input_dim;
  cfg.num_classes = num_classes;
  cfg.seed = seed;
  switch (arch) {
    case Arch::GCN: cfg.lr = 0.01; cfg.wd = 1e-5; break;
    case Arch::SAGE: cfg.lr = 0.005; cfg.wd = 1e-6; break;
    case Arch::GAT: cfg.lr = 0.005; cfg.wd = 1e-6; break;
    case Arch::GIN: cfg.lr = 0.01; cfg.wd = 1e-6; break;
    case Arch::MLP: cfg.lr = 0.001; cfg.wd = 1e-5; break;
  }
  return cfg;
}

SparseAdj normalized_adjacency(std::size_t num_nodes, std::span<const Edge> edges) {
  const auto n = static_cast<Eigen::Index>(num_nodes);
  std::vector<double> deg(num_nodes, 1.0);
  for (const auto& e : edges) {
    if (e.src < 0 || e.dst < 0 || static_cast<std::size_t>(e.src) >= num_nodes ||
        static_cast<std::size_t>(e.dst) >= num_nodes || e.src == e.dst) {
      throw InvalidArgument("normalized_adjacency: invalid edge");
    }
    deg[e.src] += 1.0;
    deg[e.dst] += 1.0;
  }
  std::vector<double> inv_sqrt(num_nodes);
  for (std::size_t u = 0; u < num_nodes; ++u) inv_sqrt[u] = 1.0 / std::sqrt(deg[u]);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(num_nodes + 2 * edges.size());
  for (std::size_t u = 0; u < num_nodes; ++u) {
    const auto i = static_cast<Eigen::Index>(u);
    trip.emplace_back(i, i, inv_sqrt[u] * inv_sqrt[u]);
  }
  for (const auto& e : edges) {
    const double w = inv_sqrt[e.src] * inv_sqrt[e.dst];
    trip.emplace_back(e.src, e.dst, w);
    trip.emplace_back(e.dst, e.src, w);
  }
  SparseAdj a(n, n);
  a.setFromTriplets(trip.begin(), trip.end());
  return a;
}

SparseAdj normalized_adjacency(const Graph& g) {
  return normalized_adjacency(g.num_nodes(), g.edges());
}

GraphOperators GraphOperators::from(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  std::vector<Eigen::Triplet<double>> mean_trip, sum_trip;
  for (Eigen::Index u = 0; u < n; ++u) {
    const auto nb = g.neighbors(static_cast<NodeId>(u));
    sum_trip.emplace_back(u, u, 1.0);
    for (NodeId v : nb) {
      mean_trip.emplace_back(u, v, 1.0 / static_cast<double>(nb.size()));
      sum_trip.emplace_back(u, v, 1.0);
    }
  }
  auto mean = std::make_shared<SparseAdj>(n, n);
  mean->setFromTriplets(mean_trip.begin(), mean_trip.end());
  auto sum = std::make_shared<SparseAdj>(n, n);
  sum->setFromTriplets(sum_trip.begin(), sum_trip.end());
  return {std::make_shared<SparseAdj>(normalized_adjacency(g)), std::move(mean), std::move(sum)};
}

LayerKind conv_kind(Arch arch) {
  switch (arch) {
    case Arch::GCN: return LayerKind::GcnConv;
    case Arch::SAGE: return LayerKind::SageConv;
    case Arch::GAT: return LayerKind::GatConv;
    case Arch::GIN: return LayerKind::GinConv;
    case Arch::MLP: return LayerKind::Dense;
  }
  return LayerKind::Dense;
}

void init_layer(ParamStore& params, LayerKind kind, const std::string& prefix, std::size_t in,
                std::size_t out, Rng& rng) {
  const auto i = static_cast<Eigen::Index>(in);
  const auto o = static_cast<Eigen::Index>(out);
  switch (kind) {
    case LayerKind::Dense:
    case LayerKind::GcnConv:
      params.add(prefix + ".weight", glorot_uniform(i, o, rng));
      params.add(prefix + ".bias", Tensor2::Zero(1, o));
      break;
    case LayerKind::SageConv:
      params.add(prefix + ".weight", glorot_uniform(2 * i, o, rng));
      params.add(prefix + ".bias", Tensor2::Zero(1, o));
      break;
    case LayerKind::GatConv:
      params.add(prefix + ".weight", glorot_uniform(i, o, rng));
      params.add(prefix + ".att_self", glorot_uniform(o, 1, rng));
      params.add(prefix + ".att_nbr", glorot_uniform(o, 1, rng));
      params.add(prefix + ".bias", Tensor2::Zero(1, o));
      break;
    case LayerKind::GinConv:
      params.add(prefix + ".mlp0.weight", glorot_uniform(i, o, rng));
      params.add(prefix + ".mlp0.bias", Tensor2::Zero(1, o));
      params.add(prefix + ".mlp1.weight", glorot_uniform(o, o, rng));
      params.add(prefix + ".mlp1.bias", Tensor2::Zero(1, o));
      break;
  }
}

Var layer_forward(Tape& tape, LayerKind kind, const std::string& prefix,
                  const GraphOperators& ops, Var x) {
  auto p = [&](const char* suffix) { return tape.param(prefix + suffix); };
  switch (kind) {
    case LayerKind::Dense:
      return tape.dense(x, p(".weight"), p(".bias"));
    case LayerKind::GcnConv:
      return tape.add_bias(tape.spmm(ops.gcn, tape.matmul(x, p(".weight"))), p(".bias"));
    case LayerKind::SageConv:
      return tape.dense(tape.concat_cols(x, tape.spmm(ops.mean_nbr, x)), p(".weight"), p(".bias"));
    case LayerKind::GatConv: {
      const Var h = tape.matmul(x, p(".weight"));
      return tape.add_bias(
          tape.gat_attention(ops.self_sum, h, p(".att_self"), p(".att_nbr"), kGatSlope),
          p(".bias"));
    }
    case LayerKind::GinConv: {
      const Var agg = tape.spmm(ops.self_sum, x);
      const Var hidden = tape.relu(tape.dense(agg, p(".mlp0.weight"), p(".mlp0.bias")));
      return tape.dense(hidden, p(".mlp1.weight"), p(".mlp1.bias"));
    }
  }
  throw InvalidArgument("layer_forward: unknown layer kind");
}

ParamStore init_classifier(const ModelConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  ParamStore params;
  const LayerKind kind = conv_kind(cfg.arch);
  init_layer(params, kind, "conv1", cfg.input_dim, cfg.hidden_dim, rng);
  init_layer(params, kind, "conv2", cfg.hidden_dim, cfg.out_embed_dim, rng);
  init_layer(params, LayerKind::Dense, "head", cfg.out_embed_dim,
             static_cast<std::size_t>(cfg.num_classes), rng);
  return params;
}

ClassifierVars classifier_forward(Tape& tape, const ModelConfig& cfg, const GraphOperators& ops,
                                  Var x) {
  const LayerKind kind = conv_kind(cfg.arch);
  const Var h1 = tape.relu(layer_forward(tape, kind, "conv1", ops, x));
  const Var z = layer_forward(tape, kind, "conv2", ops, h1);
  const Var logits = layer_forward(tape, LayerKind::Dense, "head", ops, z);
  return {z, logits};
}

TrainedModel::TrainedModel(ModelConfig config, ParamStore params, std::string source_graph_id,
                           double best_val_accuracy, int best_epoch)
    : config_(std::move(config)),
      params_(std::move(params)),
      source_graph_id_(std::move(source_graph_id)),
      best_val_accuracy_(best_val_accuracy),
      best_epoch_(best_epoch) {
  config_.validate();
  const ParamStore expected = init_classifier(config_);
  if (expected.size() != params_.size()) {
    throw InvalidArgument("model parameters do not match architecture " +
                          std::string(arch_name(config_.arch)));
  }
  for (const auto& [name, p] : expected.entries()) {
    if (!params_.contains(name)) {
      throw InvalidArgument("missing parameter '" + name + "' for " +
                            std::string(arch_name(config_.arch)));
    }
    const auto& v = params_.value(name);
    if (v.rows() != p.value.rows() || v.cols() != p.value.cols()) {
      throw InvalidArgument("parameter '" + name + "' has shape " + std::to_string(v.rows()) +
                            "x" + std::to_string(v.cols()) + ", expected " +
                            std::to_string(p.value.rows()) + "x" + std::to_string(p.value.cols()));
    }
  }
  for (auto& [_, p] : params_.entries()) {
    p.m.setZero(p.value.rows(), p.value.cols());
    p.v.setZero(p.value.rows(), p.value.cols());
    p.step = 0;
  }
  std::string arch(arch_name(config_.arch));
  std::transform(arch.begin(), arch.end(), arch.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  id_ = arch + "-s" + std::to_string(config_.seed) + "-" +
        text::hex16(text::fnv1a(format_model(*this))).substr(0, 12);
}

namespace {

std::vector<int> argmax_rows(const Tensor2& logits) {
  std::vector<int> out(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    Eigen::Index best = 0;
    logits.row(r).maxCoeff(&best);
    out[static_cast<std::size_t>(r)] = static_cast<int>(best);
  }
  return out;
}

double subset_accuracy(const std::vector<int>& pred, std::span<const int> labels,
                       std::span<const NodeId> ids) {
  std::size_t hit = 0;
  for (NodeId id : ids) hit += pred[id] == labels[id] ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(ids.size());
}

}  // namespace

TrainedModel train_classifier(const Graph& g, const Split& split, const ModelConfig& cfg_in,
                              std::vector<EpochRecord>* history) {
  ModelConfig cfg = cfg_in;
  if (cfg.input_dim == 0) cfg.input_dim = g.feature_dim();
  if (cfg.num_classes == 0) cfg.num_classes = g.num_classes();
  cfg.validate();
  if (cfg.input_dim != g.feature_dim()) throw InvalidArgument("feature dim mismatch");
  if (cfg.num_classes != g.num_classes()) throw InvalidArgument("class count mismatch");
  split.validate(g.num_nodes());
  if (split.train_ids.empty() || split.val_ids.empty()) {
    throw InvalidArgument("train and val sets must be nonempty");
  }
  for (const auto* ids : {&split.train_ids, &split.val_ids}) {
    for (NodeId id : *ids) {
      if (g.labels()[id] == kUnlabeled) {
        throw InvalidArgument("node " + std::to_string(id) + " in train/val has no label");
      }
    }
  }

  ParamStore params = init_classifier(cfg);
  const GraphOperators ops = GraphOperators::from(g);

  auto best = params.snapshot();
  double best_acc = -1.0;
  int best_epoch = 0;
  for (int epoch = 0;; ++epoch) {
    Tape tape(params);
    const Var x = tape.constant(g.features());
    const auto out = classifier_forward(tape, cfg, ops, x);
    const double val_acc = subset_accuracy(argmax_rows(tape.value(out.logits)), g.labels(),
                                           split.val_ids);
    if (val_acc > best_acc) {
      best_acc = val_acc;
      best_epoch = epoch;
      best = params.snapshot();
    }
    if (epoch >= cfg.max_epochs || epoch - best_epoch >= cfg.patience) {
      if (history) history->push_back({epoch, std::nan(""), val_acc});
      break;
    }
    const Var loss = tape.softmax_cross_entropy(out.logits, g.labels(), split.train_ids);
    const double loss_value = tape.scalar(loss);
    if (!std::isfinite(loss_value)) {
      throw NumericError("training diverged at epoch " + std::to_string(epoch));
    }
    if (history) history->push_back({epoch, loss_value, val_acc});
    const GradMap grads = tape.backward(loss);
    try {
      adam_step(params, grads, cfg.lr, cfg.wd);
    } catch (const NumericError& e) {
      throw NumericError("training diverged at epoch " + std::to_string(epoch) + ": " + e.what());
    }
  }
  params.restore(best);
  return TrainedModel(cfg, std::move(params), graph_fingerprint(g), best_acc, best_epoch);
}

Prediction embed_and_predict(const TrainedModel& model, const Graph& g) {
  const auto& cfg = model.config();
  if (g.feature_dim() != cfg.input_dim) {
    throw InvalidArgument("graph has feature dim " + std::to_string(g.feature_dim()) +
                          ", model expects " + std::to_string(cfg.input_dim));
  }
  Tape tape(model.params());
  const auto ops = GraphOperators::from(g);
  const auto out = classifier_forward(tape, cfg, ops, tape.constant(g.features()));
  Prediction p;
  p.embedding = tape.value(out.embedding);
  p.logits = tape.value(out.logits);
  p.labels = argmax_rows(p.logits);
  return p;
}

double accuracy(std::span<const int> yhat, std::span<const int> y) {
  if (yhat.size() != y.size()) throw InvalidArgument("accuracy: length mismatch");
  if (y.empty()) throw InvalidArgument("accuracy: empty input");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] == kUnlabeled) throw InvalidArgument("accuracy: unlabeled entry at " + std::to_string(i));
    hit += yhat[i] == y[i] ? 1 : 0;
  }
  return static_cast<double>(hit) / static_cast<double>(y.size());
}

std::string format_model(const TrainedModel& model) {
  const auto& c = model.config();
  std::string out = "#gnnckpt v1\n";
  out += std::string(arch_name(c.arch)) + ' ' + std::to_string(c.input_dim) + ' ' +
         std::to_string(c.hidden_dim) + ' ' + std::to_string(c.out_embed_dim) + ' ' +
         std::to_string(c.num_classes) + ' ' + std::to_string(c.num_layers) + ' ' +
         std::to_string(c.seed) + '\n';
  out += "source " + model.source_graph_id() + '\n';
  out += "train " + text::format_g17(c.lr) + ' ' + text::format_g17(c.wd) + ' ' +
         std::to_string(c.max_epochs) + ' ' + std::to_string(c.patience) + ' ' +
         text::format_g17(model.best_val_accuracy()) + ' ' + std::to_string(model.best_epoch()) +
         '\n';
  out += "params " + std::to_string(model.params().size()) + '\n';
  for (const auto& [name, p] : model.params().entries()) text::append_matrix_block(out, name, p.value);
  return out;
}

TrainedModel parse_model(const std::string& text_in) {
  text::LineReader in(text_in);
  if (in.expect("'#gnnckpt v1' header") != "#gnnckpt v1") {
    throw FormatError("missing '#gnnckpt v1' header", 1);
  }
  const auto head = text::split_ws(in.expect("architecture line"));
  if (head.size() != 7) {
    throw FormatError("architecture line must be 'arch in hidden embed classes layers seed'", 2);
  }
  ModelConfig cfg;
  try {
    cfg.arch = parse_arch(head[0]);
  } catch (const InvalidArgument& e) {
    throw FormatError(e.what(), 2);
  }
  cfg.input_dim = static_cast<std::size_t>(text::parse_int(head[1], 2));
  cfg.hidden_dim = static_cast<std::size_t>(text::parse_int(head[2], 2));
  cfg.out_embed_dim = static_cast<std::size_t>(text::parse_int(head[3], 2));
  cfg.num_classes = static_cast<int>(text::parse_int(head[4], 2));
  cfg.num_layers = static_cast<int>(text::parse_int(head[5], 2));
  cfg.seed = text::parse_u64(head[6], 2);

  const auto src = text::split_ws(in.expect("source line"));
  if (src.size() != 2 || src[0] != "source") throw FormatError("expected 'source <graph-id>'", 3);
  const auto tr = text::split_ws(in.expect("train line"));
  if (tr.size() != 7 || tr[0] != "train") {
    throw FormatError("expected 'train lr wd max_epochs patience best_val best_epoch'", 4);
  }
  cfg.lr = text::parse_double(tr[1], 4);
  cfg.wd = text::parse_double(tr[2], 4);
  cfg.max_epochs = static_cast<int>(text::parse_int(tr[3], 4));
  cfg.patience = static_cast<int>(text::parse_int(tr[4], 4));
  const double best_val = text::parse_double(tr[5], 4);
  const int best_epoch = static_cast<int>(text::parse_int(tr[6], 4));

  const auto pc = text::split_ws(in.expect("params line"));
  if (pc.size() != 2 || pc[0] != "params") throw FormatError("expected 'params <count>'", 5);
  const auto count = text::parse_int(pc[1], 5);
  ParamStore params;
  for (std::int64_t k = 0; k < count; ++k) {
    std::string name;
    Tensor2 m = text::read_matrix_block(in, name);
    params.add(name, std::move(m));
  }
  std::string_view rest;
  while (in.next(rest)) {
    if (!text::split_ws(rest).empty()) throw FormatError("trailing content", in.line_number());
  }
  return TrainedModel(cfg, std::move(params), std::string(src[1]), best_val, best_epoch);
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  text::write_file(path, format_model(model));
}

TrainedModel load_model(const std::filesystem::path& path) {
  try {
    return parse_model(text::read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what(), e.line());
  }
}

}  // namespace gnneval
