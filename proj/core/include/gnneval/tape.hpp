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
#include <map>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gnneval/graph.hpp"
#include "gnneval/tensor.hpp"

namespace gnneval {

/// One trainable tensor plus its Adam moments.
struct Param {
  Tensor2 value;
  Tensor2 m;
  Tensor2 v;
  std::int64_t step = 0;
};

/// Named parameters, iterated in name order.
class ParamStore {
 public:
  void add(const std::string& name, Tensor2 init);
  bool contains(const std::string& name) const { return params_.count(name) != 0; }
  const Tensor2& value(const std::string& name) const;
  Tensor2& value(const std::string& name);
  Param& at(const std::string& name);
  const Param& at(const std::string& name) const;

  std::map<std::string, Param>& entries() { return params_; }
  const std::map<std::string, Param>& entries() const { return params_; }
  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;

  /// Values only (no optimizer state).
  std::map<std::string, Tensor2> snapshot() const;
  void restore(const std::map<std::string, Tensor2>& values);

 private:
  std::map<std::string, Param> params_;
};

using GradMap = std::map<std::string, Tensor2>;

/// Handle to a value recorded on a Tape.
struct Var {
  std::size_t id = static_cast<std::size_t>(-1);
};

/// Reverse-mode tape over a closed set of layer primitives.
///
/// Each primitive computes its output eagerly and records what its backward
/// rule needs. backward() replays the records in reverse. Parameters are
/// copied in on first use and their gradients are reported by name.
class Tape {
 public:
  explicit Tape(const ParamStore& params) : params_(&params) {}

  Var constant(Tensor2 value);
  /// Leaf whose gradient is tracked and readable via grad() after backward().
  Var input(Tensor2 value);
  Var param(const std::string& name);

  Var matmul(Var a, Var b);
  /// x + 1 * b, with b a 1 x cols row vector.
  Var add_bias(Var x, Var b);
  Var dense(Var x, Var weight, Var bias) { return add_bias(matmul(x, weight), bias); }
  /// adj * x for a constant sparse matrix.
  Var spmm(std::shared_ptr<const SparseAdj> adj, Var x);
  /// a * w for a large constant dense `a` held by reference, not copied onto the tape.
  Var const_matmul(std::shared_ptr<const Tensor2> a, Var w);
  Var concat_cols(Var a, Var b);
  Var relu(Var x);
  Var leaky_relu(Var x, double slope);
  /// Single-head graph attention over the sparsity pattern of `pattern`
  /// (which must include the diagonal): out_u = sum_v alpha_uv h_v with
  /// alpha_u. = softmax_v(leaky_relu(h_u . att_self + h_v . att_nbr)).
  /// att_self and att_nbr are F x 1.
  Var gat_attention(std::shared_ptr<const SparseAdj> pattern, Var h, Var att_self, Var att_nbr,
                    double slope);
  /// Row-wise mean of each segment [offsets[k], offsets[k+1]) -> K x cols.
  Var segment_mean(Var x, std::vector<std::size_t> offsets);
  Var mean_pool(Var x);
  /// Mean softmax cross-entropy over the listed rows -> 1 x 1.
  Var softmax_cross_entropy(Var logits, std::span<const int> labels, std::span<const NodeId> rows);
  /// Mean of (sigmoid(x_k) - t_k)^2 over a K x 1 input -> 1 x 1.
  Var sigmoid_mse(Var x, std::span<const double> targets);
  /// Mean of (x_k - t_k)^2 over a K x 1 input -> 1 x 1 (linear-head ablation).
  Var mse(Var x, std::span<const double> targets);

  const Tensor2& value(Var v) const { return nodes_.at(v.id).value; }
  double scalar(Var v) const { return value(v)(0, 0); }

  /// Propagates `seed` (shaped like value(out)) back through the tape.
  /// Returns gradients for every parameter of the store, zero when untouched.
  GradMap backward(Var out, const Tensor2& seed);
  /// backward() with seed 1 for a 1 x 1 output.
  GradMap backward(Var loss);

  /// Gradient of a leaf created with input(); valid after backward().
  const Tensor2& grad(Var v) const;

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Leaf {};
  struct MatMul { std::size_t a, b; };
  struct AddBias { std::size_t x, b; };
  struct Spmm { std::shared_ptr<const SparseAdj> adj; std::size_t x; };
  struct ConstMatMul { std::shared_ptr<const Tensor2> a; std::size_t w; };
  struct ConcatCols { std::size_t a, b; };
  struct Relu { std::size_t x; };
  struct LeakyRelu { std::size_t x; double slope; };
  struct GatAttention {
    std::shared_ptr<const SparseAdj> pattern;
    std::size_t h, att_self, att_nbr;
    double slope;
    std::vector<double> alpha;   // per nonzero of pattern
    std::vector<double> logits;  // pre-activation, per nonzero
  };
  struct SegmentMean { std::size_t x; std::vector<std::size_t> offsets; };
  struct SoftmaxCE { std::size_t x; std::vector<int> labels; std::vector<NodeId> rows; Tensor2 probs; };
  struct SigmoidMse { std::size_t x; std::vector<double> targets; std::vector<double> sig; };
  struct Mse { std::size_t x; std::vector<double> targets; };

  using Op = std::variant<Leaf, MatMul, AddBias, Spmm, ConstMatMul, ConcatCols, Relu, LeakyRelu, GatAttention,
                          SegmentMean, SoftmaxCE, SigmoidMse, Mse>;

  struct Node {
    Tensor2 value;
    bool needs_grad = false;
    std::string param_name;
    Op op;
  };

  Var push(Tensor2 value, bool needs_grad, Op op, const char* what);
  const Node& node(Var v) const;
  bool needs(std::size_t id) const { return nodes_[id].needs_grad; }
  void accumulate(std::size_t id, const Tensor2& g);

  const ParamStore* params_;
  std::vector<Node> nodes_;
  std::vector<Tensor2> grads_;
  std::map<std::string, std::size_t> param_ids_;
};

}  // namespace gnneval
