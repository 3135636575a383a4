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

#include "gnneval/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gnneval/error.hpp"
#include "gnneval/models.hpp"
#include "gnneval/optim.hpp"
#include "text_io.hpp"

namespace gnneval {

void EvaluatorConfig::validate() const {
  if (input_dim == 0 || hidden_dim == 0) throw InvalidArgument("evaluator dims must be positive");
  if (epochs < 0) throw InvalidArgument("evaluator epochs must be >= 0");
  if (!(lr >= 0) || !(wd >= 0)) throw InvalidArgument("evaluator lr/wd must be >= 0");
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) {
    throw InvalidArgument("val_fraction must lie in [0, 1)");
  }
}

ParamStore init_evaluator(const EvaluatorConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  ParamStore params;
  init_layer(params, LayerKind::GcnConv, "conv1", cfg.input_dim, cfg.hidden_dim, rng);
  init_layer(params, LayerKind::GcnConv, "conv2", cfg.hidden_dim, cfg.hidden_dim, rng);
  init_layer(params, LayerKind::Dense, "head", cfg.hidden_dim, 1, rng);
  return params;
}

TrainedEvaluator::TrainedEvaluator(EvaluatorConfig config, ParamStore params, std::string model_id,
                                   std::string train_graph_id)
    : config_(std::move(config)),
      params_(std::move(params)),
      model_id_(std::move(model_id)),
      train_graph_id_(std::move(train_graph_id)) {
  const ParamStore expected = init_evaluator(config_);
  for (const auto& [name, p] : expected.entries()) {
    if (!params_.contains(name)) throw InvalidArgument("evaluator is missing parameter '" + name + "'");
    const auto& v = params_.value(name);
    if (v.rows() != p.value.rows() || v.cols() != p.value.cols()) {
      throw InvalidArgument("evaluator parameter '" + name + "' has the wrong shape");
    }
  }
  if (expected.size() != params_.size()) throw InvalidArgument("evaluator has unexpected parameters");
  if (model_id_.empty() || train_graph_id_.empty()) throw InvalidArgument("evaluator binding is empty");
}

namespace {

// Several DiscGraphs stacked into one block-diagonal graph. The first GCN
// layer's propagation of the constant attributes is done once here. Mean
// pooling is linear, so the second layer's propagation and the pooling fold
// into one K x rows operator: mean_i(A_hat H W + b) = (pool A_hat H) W + b.
struct Batch {
  std::shared_ptr<Tensor2> propagated;  // A_hat X, stacked
  std::shared_ptr<const SparseAdj> pool_adj;
  std::vector<double> targets;
};

Batch make_batch(const std::vector<const DiscGraph*>& discs, std::size_t width) {
  Batch b;
  std::size_t rows = 0;
  for (const auto* d : discs) {
    if (d->train_node_count() != width) {
      throw InvalidArgument("DiscGraph " + d->provenance + " has width " +
                            std::to_string(d->train_node_count()) + ", expected " +
                            std::to_string(width));
    }
    if (static_cast<std::size_t>(d->attrs.rows()) != d->num_nodes || d->num_nodes == 0) {
      throw InvalidArgument("DiscGraph " + d->provenance + " has inconsistent node count");
    }
    rows += d->num_nodes;
    b.targets.push_back(d->label.value_or(std::numeric_limits<double>::quiet_NaN()));
  }
  const auto total = static_cast<Eigen::Index>(rows);
  std::vector<Eigen::Triplet<double>> trip;
  b.propagated = std::make_shared<Tensor2>(total, static_cast<Eigen::Index>(width));
  Eigen::Index base = 0;
  for (std::size_t k = 0; k < discs.size(); ++k) {
    const auto* d = discs[k];
    const SparseAdj a = normalized_adjacency(d->num_nodes, d->edges);
    b.propagated->middleRows(base, a.rows()) = a * d->attrs;
    // Column sums of A_hat divided by the node count.
    Eigen::RowVectorXd pool = Eigen::RowVectorXd::Zero(a.cols());
    for (Eigen::Index r = 0; r < a.outerSize(); ++r) {
      for (SparseAdj::InnerIterator it(a, r); it; ++it) pool(it.col()) += it.value();
    }
    pool /= static_cast<double>(d->num_nodes);
    for (Eigen::Index c = 0; c < pool.size(); ++c) {
      trip.emplace_back(static_cast<Eigen::Index>(k), base + c, pool(c));
    }
    base += a.rows();
  }
  auto pool_adj = std::make_shared<SparseAdj>(static_cast<Eigen::Index>(discs.size()), total);
  pool_adj->setFromTriplets(trip.begin(), trip.end());
  b.pool_adj = std::move(pool_adj);
  return b;
}

// Pre-head scores, K x 1.
Var forward_scores(Tape& tape, const Batch& b) {
  const Var h1 = tape.relu(tape.add_bias(tape.const_matmul(b.propagated, tape.param("conv1.weight")),
                                         tape.param("conv1.bias")));
  const Var pooled = tape.add_bias(tape.matmul(tape.spmm(b.pool_adj, h1), tape.param("conv2.weight")),
                                   tape.param("conv2.bias"));
  return tape.dense(pooled, tape.param("head.weight"), tape.param("head.bias"));
}

Var loss_of(Tape& tape, Var scores, const Batch& b, EvaluatorHead head) {
  return head == EvaluatorHead::Sigmoid ? tape.sigmoid_mse(scores, b.targets)
                                        : tape.mse(scores, b.targets);
}

std::vector<double> predict(const ParamStore& params, const Batch& b, EvaluatorHead head) {
  Tape tape(params);
  const Tensor2& s = tape.value(forward_scores(tape, b));
  std::vector<double> out(static_cast<std::size_t>(s.rows()));
  for (Eigen::Index k = 0; k < s.rows(); ++k) {
    const double v = s(k, 0);
    out[static_cast<std::size_t>(k)] = head == EvaluatorHead::Sigmoid ? 1.0 / (1.0 + std::exp(-v)) : v;
  }
  return out;
}

double batch_mse(const ParamStore& params, const Batch& b, EvaluatorHead head) {
  Tape tape(params);
  return tape.scalar(loss_of(tape, forward_scores(tape, b), b, head));
}

void check_binding(const TrainedEvaluator& ev, const DiscGraph& d) {
  if (d.model_id != ev.model_id() || d.train_graph_id != ev.train_graph_id()) {
    throw InvalidArgument("DiscGraph " + d.provenance + " is bound to (" + d.model_id + ", " +
                          d.train_graph_id + "), evaluator to (" + ev.model_id() + ", " +
                          ev.train_graph_id() + ")");
  }
}

}  // namespace

TrainedEvaluator train_evaluator(const std::vector<DiscGraph>& discs, const EvaluatorConfig& cfg_in,
                                 EvaluatorTrainLog* log) {
  if (discs.size() < 2) throw InvalidArgument("train_evaluator: need at least 2 DiscGraphs");
  EvaluatorConfig cfg = cfg_in;
  if (cfg.input_dim == 0) cfg.input_dim = discs.front().train_node_count();
  cfg.validate();
  for (const auto& d : discs) {
    if (!d.label) throw InvalidArgument("train_evaluator: DiscGraph " + d.provenance + " has no label");
    if (d.model_id != discs.front().model_id || d.train_graph_id != discs.front().train_graph_id) {
      throw InvalidArgument("train_evaluator: DiscGraphs come from different (model, graph) pairs");
    }
  }

  std::vector<std::size_t> val_idx, train_idx;
  if (cfg.val_fraction > 0.0) {
    const auto k = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(cfg.val_fraction * static_cast<double>(discs.size()))),
        1, discs.size() - 1);
    Rng rng = Rng(cfg.seed).split(0x76616c);
    val_idx = rng.sample_without_replacement(discs.size(), k);
    std::sort(val_idx.begin(), val_idx.end());
  }
  for (std::size_t i = 0; i < discs.size(); ++i) {
    if (!std::binary_search(val_idx.begin(), val_idx.end(), i)) train_idx.push_back(i);
  }
  auto gather = [&](const std::vector<std::size_t>& idx) {
    std::vector<const DiscGraph*> out;
    for (std::size_t i : idx) out.push_back(&discs[i]);
    return out;
  };
  const Batch train = make_batch(gather(train_idx), cfg.input_dim);
  const bool has_val = !val_idx.empty();
  const Batch val = has_val ? make_batch(gather(val_idx), cfg.input_dim) : Batch{};

  ParamStore params = init_evaluator(cfg);
  auto best = params.snapshot();
  double best_mse = std::numeric_limits<double>::infinity();
  int best_epoch = 0;
  if (log) {
    *log = EvaluatorTrainLog{};
    log->train_indices = train_idx;
    log->val_indices = val_idx;
  }
  for (int epoch = 0;; ++epoch) {
    Tape tape(params);
    const Var loss = loss_of(tape, forward_scores(tape, train), train, cfg.head);
    const double train_mse = tape.scalar(loss);
    if (!std::isfinite(train_mse)) {
      throw NumericError("evaluator training diverged at epoch " + std::to_string(epoch));
    }
    const double monitor = has_val ? batch_mse(params, val, cfg.head) : train_mse;
    if (log) {
      log->train_mse.push_back(train_mse);
      if (has_val) log->val_mse.push_back(monitor);
      if (epoch == 0) log->initial_monitor_mse = monitor;
    }
    if (monitor < best_mse) {
      best_mse = monitor;
      best_epoch = epoch;
      best = params.snapshot();
    }
    if (epoch >= cfg.epochs) break;
    adam_step(params, tape.backward(loss), cfg.lr, cfg.wd);
  }
  params.restore(best);
  if (log) {
    log->best_epoch = best_epoch;
    log->best_monitor_mse = best_mse;
  }
  return TrainedEvaluator(cfg, std::move(params), discs.front().model_id,
                          discs.front().train_graph_id);
}

double estimate_accuracy(const TrainedEvaluator& ev, const DiscGraph& d) {
  check_binding(ev, d);
  const Batch b = make_batch({&d}, ev.config().input_dim);
  return predict(ev.params(), b, ev.config().head).front();
}

std::vector<double> estimate_accuracies(const TrainedEvaluator& ev,
                                        const std::vector<DiscGraph>& discs) {
  std::vector<double> out;
  out.reserve(discs.size());
  for (const auto& d : discs) out.push_back(estimate_accuracy(ev, d));
  return out;
}

double evaluator_mse(const TrainedEvaluator& ev, const std::vector<DiscGraph>& discs) {
  if (discs.empty()) throw InvalidArgument("evaluator_mse: no DiscGraphs");
  std::vector<const DiscGraph*> ptrs;
  for (const auto& d : discs) {
    check_binding(ev, d);
    if (!d.label) throw InvalidArgument("evaluator_mse: unlabeled DiscGraph " + d.provenance);
    ptrs.push_back(&d);
  }
  return batch_mse(ev.params(), make_batch(ptrs, ev.config().input_dim), ev.config().head);
}

std::string format_evaluator(const TrainedEvaluator& ev) {
  const auto& c = ev.config();
  std::string out = "#gnneval v1\n";
  out += "bound: " + ev.model_id() + ' ' + ev.train_graph_id() + ' ' + std::to_string(c.input_dim) + '\n';
  out += "config " + std::to_string(c.hidden_dim) + ' ' + text::format_g17(c.lr) + ' ' +
         text::format_g17(c.wd) + ' ' + std::to_string(c.epochs) + ' ' + std::to_string(c.seed) +
         ' ' + text::format_g17(c.val_fraction) + ' ' +
         (c.head == EvaluatorHead::Sigmoid ? "sigmoid" : "linear") + '\n';
  out += "params " + std::to_string(ev.params().size()) + '\n';
  for (const auto& [name, p] : ev.params().entries()) text::append_matrix_block(out, name, p.value);
  return out;
}

TrainedEvaluator parse_evaluator(const std::string& text_in) {
  text::LineReader in(text_in);
  if (in.expect("'#gnneval v1' header") != "#gnneval v1") {
    throw FormatError("missing '#gnneval v1' header", 1);
  }
  const auto bound = text::split_ws(in.expect("binding line"));
  if (bound.size() != 4 || bound[0] != "bound:") {
    throw FormatError("missing binding line 'bound: <model-id> <train-graph-id> <N>'", 2);
  }
  EvaluatorConfig cfg;
  cfg.input_dim = static_cast<std::size_t>(text::parse_int(bound[3], 2));
  const auto conf = text::split_ws(in.expect("config line"));
  if (conf.size() != 8 || conf[0] != "config") {
    throw FormatError("expected 'config hidden lr wd epochs seed val_fraction head'", 3);
  }
  cfg.hidden_dim = static_cast<std::size_t>(text::parse_int(conf[1], 3));
  cfg.lr = text::parse_double(conf[2], 3);
  cfg.wd = text::parse_double(conf[3], 3);
  cfg.epochs = static_cast<int>(text::parse_int(conf[4], 3));
  cfg.seed = text::parse_u64(conf[5], 3);
  cfg.val_fraction = text::parse_double(conf[6], 3);
  if (conf[7] == "sigmoid") {
    cfg.head = EvaluatorHead::Sigmoid;
  } else if (conf[7] == "linear") {
    cfg.head = EvaluatorHead::Linear;
  } else {
    throw FormatError("unknown head '" + std::string(conf[7]) + "'", 3);
  }
  const auto pc = text::split_ws(in.expect("params line"));
  if (pc.size() != 2 || pc[0] != "params") throw FormatError("expected 'params <count>'", 4);
  const auto count = text::parse_int(pc[1], 4);
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
  return TrainedEvaluator(cfg, std::move(params), std::string(bound[1]), std::string(bound[2]));
}

void save_evaluator(const TrainedEvaluator& ev, const std::filesystem::path& path) {
  text::write_file(path, format_evaluator(ev));
}

TrainedEvaluator load_evaluator(const std::filesystem::path& path) {
  try {
    return parse_evaluator(text::read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what(), e.line());
  }
}

}  // namespace gnneval
