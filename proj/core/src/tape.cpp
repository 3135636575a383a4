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

#include "gnneval/tape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gnneval/error.hpp"

namespace gnneval {

void ParamStore::add(const std::string& name, Tensor2 init) {
  if (contains(name)) throw InvalidArgument("duplicate parameter '" + name + "'");
  Param p;
  p.m = Tensor2::Zero(init.rows(), init.cols());
  p.v = Tensor2::Zero(init.rows(), init.cols());
  p.value = std::move(init);
  params_.emplace(name, std::move(p));
}

Param& ParamStore::at(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw InvalidArgument("unknown parameter '" + name + "'");
  return it->second;
}

const Param& ParamStore::at(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw InvalidArgument("unknown parameter '" + name + "'");
  return it->second;
}

const Tensor2& ParamStore::value(const std::string& name) const { return at(name).value; }
Tensor2& ParamStore::value(const std::string& name) { return at(name).value; }

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [_, p] : params_) n += static_cast<std::size_t>(p.value.size());
  return n;
}

std::map<std::string, Tensor2> ParamStore::snapshot() const {
  std::map<std::string, Tensor2> out;
  for (const auto& [name, p] : params_) out.emplace(name, p.value);
  return out;
}

void ParamStore::restore(const std::map<std::string, Tensor2>& values) {
  for (const auto& [name, v] : values) {
    auto& dst = value(name);
    if (dst.rows() != v.rows() || dst.cols() != v.cols()) {
      throw InvalidArgument("restore: shape mismatch for '" + name + "'");
    }
    dst = v;
  }
}

namespace {

std::string shape(const Tensor2& t) {
  return std::to_string(t.rows()) + "x" + std::to_string(t.cols());
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw InvalidArgument(msg);
}

}  // namespace

Var Tape::push(Tensor2 value, bool needs_grad, Op op, const char* what) {
  if (!value.allFinite()) throw NumericError(std::string("non-finite output in ") + what);
  nodes_.push_back(Node{std::move(value), needs_grad, {}, std::move(op)});
  return Var{nodes_.size() - 1};
}

const Tape::Node& Tape::node(Var v) const {
  if (v.id >= nodes_.size()) throw InvalidArgument("tape: invalid Var");
  return nodes_[v.id];
}

Var Tape::constant(Tensor2 value) { return push(std::move(value), false, Leaf{}, "constant"); }

Var Tape::input(Tensor2 value) { return push(std::move(value), true, Leaf{}, "input"); }

Var Tape::param(const std::string& name) {
  if (auto it = param_ids_.find(name); it != param_ids_.end()) return Var{it->second};
  Var v = push(params_->value(name), true, Leaf{}, "param");
  nodes_[v.id].param_name = name;
  param_ids_.emplace(name, v.id);
  return v;
}

Var Tape::matmul(Var a, Var b) {
  const auto& va = node(a).value;
  const auto& vb = node(b).value;
  require(va.cols() == vb.rows(), "matmul: shape mismatch " + shape(va) + " * " + shape(vb));
  Tensor2 out = va * vb;
  return push(std::move(out), needs(a.id) || needs(b.id), MatMul{a.id, b.id}, "matmul");
}

Var Tape::add_bias(Var x, Var b) {
  const auto& vx = node(x).value;
  const auto& vb = node(b).value;
  require(vb.rows() == 1 && vb.cols() == vx.cols(),
          "add_bias: bias " + shape(vb) + " does not fit " + shape(vx));
  Tensor2 out = vx.rowwise() + vb.row(0);
  return push(std::move(out), needs(x.id) || needs(b.id), AddBias{x.id, b.id}, "add_bias");
}

Var Tape::spmm(std::shared_ptr<const SparseAdj> adj, Var x) {
  const auto& vx = node(x).value;
  require(adj && adj->cols() == vx.rows(),
          "spmm: adjacency does not match input rows " + shape(vx));
  Tensor2 out = (*adj) * vx;
  return push(std::move(out), needs(x.id), Spmm{std::move(adj), x.id}, "spmm");
}

Var Tape::const_matmul(std::shared_ptr<const Tensor2> a, Var w) {
  const auto& vw = node(w).value;
  require(a && a->cols() == vw.rows(), "const_matmul: " + (a ? shape(*a) : std::string("null")) +
                                           " x " + shape(vw));
  Tensor2 out = (*a) * vw;
  return push(std::move(out), needs(w.id), ConstMatMul{std::move(a), w.id}, "const_matmul");
}

Var Tape::concat_cols(Var a, Var b) {
  const auto& va = node(a).value;
  const auto& vb = node(b).value;
  require(va.rows() == vb.rows(), "concat_cols: row mismatch " + shape(va) + " | " + shape(vb));
  Tensor2 out(va.rows(), va.cols() + vb.cols());
  out.leftCols(va.cols()) = va;
  out.rightCols(vb.cols()) = vb;
  return push(std::move(out), needs(a.id) || needs(b.id), ConcatCols{a.id, b.id}, "concat");
}

Var Tape::relu(Var x) {
  Tensor2 out = node(x).value.cwiseMax(0.0);
  return push(std::move(out), needs(x.id), Relu{x.id}, "relu");
}

Var Tape::leaky_relu(Var x, double slope) {
  Tensor2 out = node(x).value.unaryExpr([slope](double v) { return v > 0 ? v : slope * v; });
  return push(std::move(out), needs(x.id), LeakyRelu{x.id, slope}, "leaky_relu");
}

Var Tape::gat_attention(std::shared_ptr<const SparseAdj> pattern, Var h, Var att_self,
                        Var att_nbr, double slope) {
  const auto& vh = node(h).value;
  const auto& as = node(att_self).value;
  const auto& an = node(att_nbr).value;
  require(pattern && pattern->rows() == vh.rows() && pattern->cols() == vh.rows(),
          "gat_attention: pattern does not match " + shape(vh));
  require(as.rows() == vh.cols() && as.cols() == 1 && an.rows() == vh.cols() && an.cols() == 1,
          "gat_attention: attention vectors must be " + std::to_string(vh.cols()) + "x1");
  const Eigen::VectorXd s_self = vh * as.col(0);
  const Eigen::VectorXd s_nbr = vh * an.col(0);

  GatAttention rec{pattern, h.id, att_self.id, att_nbr.id, slope, {}, {}};
  const auto nnz = static_cast<std::size_t>(pattern->nonZeros());
  rec.alpha.resize(nnz);
  rec.logits.resize(nnz);
  const int* outer = pattern->outerIndexPtr();
  const int* inner = pattern->innerIndexPtr();
  Tensor2 out = Tensor2::Zero(vh.rows(), vh.cols());
  for (Eigen::Index u = 0; u < vh.rows(); ++u) {
    const int begin = outer[u], end = outer[u + 1];
    if (begin == end) continue;
    double mx = -std::numeric_limits<double>::infinity();
    for (int k = begin; k < end; ++k) {
      const double pre = s_self[u] + s_nbr[inner[k]];
      rec.logits[k] = pre;
      const double e = pre > 0 ? pre : slope * pre;
      rec.alpha[k] = e;
      mx = std::max(mx, e);
    }
    double z = 0.0;
    for (int k = begin; k < end; ++k) {
      rec.alpha[k] = std::exp(rec.alpha[k] - mx);
      z += rec.alpha[k];
    }
    for (int k = begin; k < end; ++k) {
      rec.alpha[k] /= z;
      out.row(u) += rec.alpha[k] * vh.row(inner[k]);
    }
  }
  const bool ng = needs(h.id) || needs(att_self.id) || needs(att_nbr.id);
  return push(std::move(out), ng, std::move(rec), "gat_attention");
}

Var Tape::segment_mean(Var x, std::vector<std::size_t> offsets) {
  const auto& vx = node(x).value;
  require(offsets.size() >= 2 && offsets.front() == 0 &&
              offsets.back() == static_cast<std::size_t>(vx.rows()),
          "segment_mean: offsets must cover all rows");
  const auto k = static_cast<Eigen::Index>(offsets.size() - 1);
  Tensor2 out(k, vx.cols());
  for (Eigen::Index s = 0; s < k; ++s) {
    const auto b = static_cast<Eigen::Index>(offsets[s]);
    const auto e = static_cast<Eigen::Index>(offsets[s + 1]);
    require(e > b, "segment_mean: empty segment");
    out.row(s) = vx.middleRows(b, e - b).colwise().sum() / static_cast<double>(e - b);
  }
  return push(std::move(out), needs(x.id), SegmentMean{x.id, std::move(offsets)}, "segment_mean");
}

Var Tape::mean_pool(Var x) {
  return segment_mean(x, {0, static_cast<std::size_t>(node(x).value.rows())});
}

Var Tape::softmax_cross_entropy(Var logits, std::span<const int> labels,
                                std::span<const NodeId> rows) {
  const auto& z = node(logits).value;
  require(labels.size() == static_cast<std::size_t>(z.rows()),
          "softmax_cross_entropy: label count != logit rows");
  require(!rows.empty(), "softmax_cross_entropy: no rows selected");
  SoftmaxCE rec{logits.id, {labels.begin(), labels.end()}, {rows.begin(), rows.end()}, {}};
  rec.probs.resize(static_cast<Eigen::Index>(rows.size()), z.cols());
  double loss = 0.0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const NodeId r = rows[k];
    const int y = labels[r];
    require(r >= 0 && r < z.rows(), "softmax_cross_entropy: row out of range");
    require(y >= 0 && y < z.cols(), "softmax_cross_entropy: label out of range");
    const double mx = z.row(r).maxCoeff();
    const Eigen::RowVectorXd e = (z.row(r).array() - mx).exp().matrix();
    const double sum = e.sum();
    rec.probs.row(static_cast<Eigen::Index>(k)) = e / sum;
    loss -= (z(r, y) - mx) - std::log(sum);
  }
  Tensor2 out(1, 1);
  out(0, 0) = loss / static_cast<double>(rows.size());
  return push(std::move(out), needs(logits.id), std::move(rec), "softmax_cross_entropy");
}

Var Tape::sigmoid_mse(Var x, std::span<const double> targets) {
  const auto& vx = node(x).value;
  require(vx.cols() == 1 && static_cast<std::size_t>(vx.rows()) == targets.size() && !targets.empty(),
          "sigmoid_mse: expected " + std::to_string(targets.size()) + "x1 input, got " + shape(vx));
  SigmoidMse rec{x.id, {targets.begin(), targets.end()}, std::vector<double>(targets.size())};
  double loss = 0.0;
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const double s = 1.0 / (1.0 + std::exp(-vx(static_cast<Eigen::Index>(k), 0)));
    rec.sig[k] = s;
    loss += (s - targets[k]) * (s - targets[k]);
  }
  Tensor2 out(1, 1);
  out(0, 0) = loss / static_cast<double>(targets.size());
  return push(std::move(out), needs(x.id), std::move(rec), "sigmoid_mse");
}

Var Tape::mse(Var x, std::span<const double> targets) {
  const auto& vx = node(x).value;
  require(vx.cols() == 1 && static_cast<std::size_t>(vx.rows()) == targets.size() && !targets.empty(),
          "mse: expected " + std::to_string(targets.size()) + "x1 input, got " + shape(vx));
  double loss = 0.0;
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const double d = vx(static_cast<Eigen::Index>(k), 0) - targets[k];
    loss += d * d;
  }
  Tensor2 out(1, 1);
  out(0, 0) = loss / static_cast<double>(targets.size());
  return push(std::move(out), needs(x.id), Mse{x.id, {targets.begin(), targets.end()}}, "mse");
}

void Tape::accumulate(std::size_t id, const Tensor2& g) {
  if (!nodes_[id].needs_grad) return;
  auto& dst = grads_[id];
  if (dst.size() == 0) {
    dst = g;
  } else {
    dst += g;
  }
}

GradMap Tape::backward(Var loss) {
  require(node(loss).value.rows() == 1 && node(loss).value.cols() == 1,
          "backward: scalar seed requires a 1x1 output");
  return backward(loss, Tensor2::Ones(1, 1));
}

GradMap Tape::backward(Var out, const Tensor2& seed) {
  const auto& vo = node(out).value;
  require(seed.rows() == vo.rows() && seed.cols() == vo.cols(),
          "backward: seed " + shape(seed) + " does not match output " + shape(vo));
  grads_.assign(nodes_.size(), Tensor2());
  if (nodes_[out.id].needs_grad) grads_[out.id] = seed;

  for (std::size_t i = out.id + 1; i-- > 0;) {
    if (!nodes_[i].needs_grad || grads_[i].size() == 0) continue;
    const Tensor2& g = grads_[i];
    std::visit(
        [&](auto& op) {
          using T = std::decay_t<decltype(op)>;
          if constexpr (std::is_same_v<T, Leaf>) {
          } else if constexpr (std::is_same_v<T, MatMul>) {
            if (needs(op.a)) accumulate(op.a, g * nodes_[op.b].value.transpose());
            if (needs(op.b)) accumulate(op.b, nodes_[op.a].value.transpose() * g);
          } else if constexpr (std::is_same_v<T, AddBias>) {
            if (needs(op.x)) accumulate(op.x, g);
            if (needs(op.b)) accumulate(op.b, g.colwise().sum());
          } else if constexpr (std::is_same_v<T, Spmm>) {
            if (needs(op.x)) accumulate(op.x, Tensor2(op.adj->transpose() * g));
          } else if constexpr (std::is_same_v<T, ConstMatMul>) {
            if (needs(op.w)) accumulate(op.w, Tensor2(op.a->transpose() * g));
          } else if constexpr (std::is_same_v<T, ConcatCols>) {
            const auto ca = nodes_[op.a].value.cols();
            if (needs(op.a)) accumulate(op.a, g.leftCols(ca));
            if (needs(op.b)) accumulate(op.b, g.rightCols(g.cols() - ca));
          } else if constexpr (std::is_same_v<T, Relu>) {
            const auto& x = nodes_[op.x].value;
            accumulate(op.x, Tensor2(g.array() * (x.array() > 0.0).template cast<double>()));
          } else if constexpr (std::is_same_v<T, LeakyRelu>) {
            const auto& x = nodes_[op.x].value;
            const double s = op.slope;
            accumulate(op.x, Tensor2(g.array() * x.array().unaryExpr([s](double v) {
              return v > 0 ? 1.0 : s;
            })));
          } else if constexpr (std::is_same_v<T, GatAttention>) {
            const auto& h = nodes_[op.h].value;
            const auto& as = nodes_[op.att_self].value;
            const auto& an = nodes_[op.att_nbr].value;
            const int* outer = op.pattern->outerIndexPtr();
            const int* inner = op.pattern->innerIndexPtr();
            Tensor2 dh = Tensor2::Zero(h.rows(), h.cols());
            Eigen::VectorXd ds_self = Eigen::VectorXd::Zero(h.rows());
            Eigen::VectorXd ds_nbr = Eigen::VectorXd::Zero(h.rows());
            for (Eigen::Index u = 0; u < h.rows(); ++u) {
              const int begin = outer[u], end = outer[u + 1];
              double weighted = 0.0;
              for (int k = begin; k < end; ++k) {
                const double da = g.row(u).dot(h.row(inner[k]));
                weighted += op.alpha[k] * da;
                dh.row(inner[k]) += op.alpha[k] * g.row(u);
              }
              for (int k = begin; k < end; ++k) {
                const double da = g.row(u).dot(h.row(inner[k]));
                const double de = op.alpha[k] * (da - weighted);
                const double dpre = op.logits[k] > 0 ? de : op.slope * de;
                ds_self[u] += dpre;
                ds_nbr[inner[k]] += dpre;
              }
            }
            if (needs(op.h)) {
              dh += ds_self * as.col(0).transpose() + ds_nbr * an.col(0).transpose();
              accumulate(op.h, dh);
            }
            if (needs(op.att_self)) accumulate(op.att_self, Tensor2(h.transpose() * ds_self));
            if (needs(op.att_nbr)) accumulate(op.att_nbr, Tensor2(h.transpose() * ds_nbr));
          } else if constexpr (std::is_same_v<T, SegmentMean>) {
            const auto& x = nodes_[op.x].value;
            Tensor2 dx(x.rows(), x.cols());
            for (std::size_t s = 0; s + 1 < op.offsets.size(); ++s) {
              const auto b = static_cast<Eigen::Index>(op.offsets[s]);
              const auto e = static_cast<Eigen::Index>(op.offsets[s + 1]);
              const Eigen::RowVectorXd row = g.row(static_cast<Eigen::Index>(s)) / double(e - b);
              dx.middleRows(b, e - b).rowwise() = row;
            }
            accumulate(op.x, dx);
          } else if constexpr (std::is_same_v<T, SoftmaxCE>) {
            const auto& z = nodes_[op.x].value;
            Tensor2 dz = Tensor2::Zero(z.rows(), z.cols());
            const double scale = g(0, 0) / static_cast<double>(op.rows.size());
            for (std::size_t k = 0; k < op.rows.size(); ++k) {
              const NodeId r = op.rows[k];
              dz.row(r) += scale * op.probs.row(static_cast<Eigen::Index>(k));
              dz(r, op.labels[r]) -= scale;
            }
            accumulate(op.x, dz);
          } else if constexpr (std::is_same_v<T, SigmoidMse>) {
            const auto n = static_cast<Eigen::Index>(op.targets.size());
            Tensor2 dx(n, 1);
            for (Eigen::Index k = 0; k < n; ++k) {
              const double s = op.sig[k];
              dx(k, 0) = g(0, 0) * 2.0 * (s - op.targets[k]) * s * (1.0 - s) / double(n);
            }
            accumulate(op.x, dx);
          } else if constexpr (std::is_same_v<T, Mse>) {
            const auto& x = nodes_[op.x].value;
            const auto n = static_cast<Eigen::Index>(op.targets.size());
            Tensor2 dx(n, 1);
            for (Eigen::Index k = 0; k < n; ++k) {
              dx(k, 0) = g(0, 0) * 2.0 * (x(k, 0) - op.targets[k]) / double(n);
            }
            accumulate(op.x, dx);
          }
        },
        nodes_[i].op);
  }

  GradMap out_grads;
  for (const auto& [name, p] : params_->entries()) {
    auto it = param_ids_.find(name);
    if (it != param_ids_.end() && grads_[it->second].size() != 0) {
      out_grads.emplace(name, grads_[it->second]);
    } else {
      out_grads.emplace(name, Tensor2::Zero(p.value.rows(), p.value.cols()));
    }
  }
  return out_grads;
}

const Tensor2& Tape::grad(Var v) const {
  if (v.id >= grads_.size()) throw InvalidArgument("grad: backward() has not reached this Var");
  return grads_[v.id];
}

}  // namespace gnneval
