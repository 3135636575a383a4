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

#include "gnneval/discrepancy.hpp"

#include <algorithm>
#include <cmath>

#include "gnneval/error.hpp"
#include "parallel.hpp"
#include "text_io.hpp"

namespace gnneval {

namespace {

constexpr double kMinNorm = 1e-12;

Eigen::VectorXd row_norms(const Tensor2& z, std::size_t& degenerate) {
  Eigen::VectorXd n = z.rowwise().norm();
  for (Eigen::Index i = 0; i < n.size(); ++i) {
    if (n[i] == 0.0) {
      n[i] = kMinNorm;
      ++degenerate;
    }
  }
  return n;
}

}  // namespace

Tensor2 disc_attrs(const Tensor2& z_meta, const Tensor2& z_train, std::size_t* degenerate,
                   DiscNorm norm) {
  if (z_meta.cols() != z_train.cols()) {
    throw InvalidArgument("disc_attrs: embedding dims differ (" + std::to_string(z_meta.cols()) +
                          " vs " + std::to_string(z_train.cols()) + ")");
  }
  std::size_t bad = 0;
  Tensor2 out = z_meta * z_train.transpose();
  if (norm == DiscNorm::RowCosine) {
    const Eigen::VectorXd nm = row_norms(z_meta, bad);
    const Eigen::VectorXd nt = row_norms(z_train, bad);
    out.array().colwise() /= nm.array();
    out.array().rowwise() /= nt.transpose().array();
  } else {
    double d = z_meta.norm() * z_train.norm();
    if (d == 0.0) {
      d = kMinNorm;
      ++bad;
    }
    out /= d;
  }
  out = out.cwiseMax(-1.0).cwiseMin(1.0);
  if (degenerate) *degenerate = bad;
  return out;
}

double label_meta(const TrainedModel& model, const MetaGraph& mg) {
  if (!mg.graph.fully_labeled()) throw InvalidArgument("label_meta: meta-graph is not fully labeled");
  const auto pred = embed_and_predict(model, mg.graph);
  return accuracy(pred.labels, mg.graph.labels());
}

DiscrepancyContext::DiscrepancyContext(const TrainedModel& model, const Graph& train_graph,
                                       DiscNorm norm)
    : model_(&model), train_graph_id_(graph_fingerprint(train_graph)), norm_(norm) {
  if (train_graph_id_ != model.source_graph_id()) {
    throw InvalidArgument("model " + model.id() + " was trained on graph " +
                          model.source_graph_id() + ", not " + train_graph_id_);
  }
  z_train_ = embed_and_predict(model, train_graph).embedding;
}

DiscGraph build_discgraph(const DiscrepancyContext& ctx, const MetaGraph& mg) {
  if (!mg.graph.fully_labeled()) {
    throw InvalidArgument("build_discgraph: meta-graph " + std::to_string(mg.index) +
                          " is not fully labeled");
  }
  const auto pred = embed_and_predict(ctx.model(), mg.graph);
  DiscGraph d;
  d.attrs = disc_attrs(pred.embedding, ctx.train_embedding(), &d.degenerate_rows, ctx.norm());
  d.num_nodes = mg.graph.num_nodes();
  d.edges.assign(mg.graph.edges().begin(), mg.graph.edges().end());
  d.label = accuracy(pred.labels, mg.graph.labels());
  d.model_id = ctx.model().id();
  d.train_graph_id = ctx.train_graph_id();
  d.provenance = "meta:" + std::to_string(mg.index);
  return d;
}

DiscGraph build_discgraph(const TrainedModel& model, const Graph& train_graph, const MetaGraph& mg) {
  return build_discgraph(DiscrepancyContext(model, train_graph), mg);
}

DiscGraph build_inference_discgraph(const DiscrepancyContext& ctx, const Graph& target,
                                    const std::string& target_name) {
  // Only features and structure are passed on; labels never leave `target`.
  const Graph blind(target.features(), std::vector<int>(target.num_nodes(), kUnlabeled),
                    {target.edges().begin(), target.edges().end()}, target.num_classes());
  const auto pred = embed_and_predict(ctx.model(), blind);
  DiscGraph d;
  d.attrs = disc_attrs(pred.embedding, ctx.train_embedding(), &d.degenerate_rows, ctx.norm());
  d.num_nodes = blind.num_nodes();
  d.edges.assign(blind.edges().begin(), blind.edges().end());
  d.model_id = ctx.model().id();
  d.train_graph_id = ctx.train_graph_id();
  d.provenance = "target:" + target_name;
  return d;
}

DiscGraph build_inference_discgraph(const TrainedModel& model, const Graph& train_graph,
                                    const Graph& target) {
  return build_inference_discgraph(DiscrepancyContext(model, train_graph), target);
}

std::vector<DiscGraph> build_disc_set(const DiscrepancyContext& ctx,
                                      const std::vector<MetaGraph>& metas, unsigned threads) {
  std::vector<DiscGraph> out(metas.size());
  detail::parallel_for(metas.size(), threads,
                       [&](std::size_t i) { out[i] = build_discgraph(ctx, metas[i]); });
  return out;
}

std::string format_disc(const DiscGraph& d) {
  std::string out = "#disc v1\n";
  out += std::to_string(d.attrs.rows()) + ' ' + std::to_string(d.attrs.cols()) + ' ' +
         (d.label ? text::format_g17(*d.label) : std::string("NA")) + '\n';
  out += "bound " + d.model_id + ' ' + d.train_graph_id + ' ' + d.provenance + '\n';
  for (Eigen::Index r = 0; r < d.attrs.rows(); ++r) {
    for (Eigen::Index c = 0; c < d.attrs.cols(); ++c) {
      if (c) out += ' ';
      out += text::format_g9(d.attrs(r, c));
    }
    out += '\n';
  }
  for (const auto& e : d.edges) out += std::to_string(e.src) + ' ' + std::to_string(e.dst) + '\n';
  return out;
}

DiscGraph parse_disc(const std::string& text_in) {
  text::LineReader in(text_in);
  if (in.expect("'#disc v1' header") != "#disc v1") throw FormatError("missing '#disc v1' header", 1);
  const auto head = text::split_ws(in.expect("'M N label' line"));
  if (head.size() != 3) throw FormatError("header must be 'M N label'", 2);
  const auto m = text::parse_int(head[0], 2);
  const auto n = text::parse_int(head[1], 2);
  if (m <= 0 || n <= 0) throw FormatError("M and N must be positive", 2);
  DiscGraph d;
  if (head[2] != "NA") {
    const double y = text::parse_double(head[2], 2);
    if (!(y >= 0.0 && y <= 1.0)) throw FormatError("label must lie in [0, 1]", 2);
    d.label = y;
  }
  const auto bound = text::split_ws(in.expect("bound line"));
  if (bound.size() != 4 || bound[0] != "bound") {
    throw FormatError("expected 'bound <model-id> <graph-id> <provenance>'", 3);
  }
  d.model_id = bound[1];
  d.train_graph_id = bound[2];
  d.provenance = bound[3];
  d.num_nodes = static_cast<std::size_t>(m);
  d.attrs.resize(m, n);
  for (std::int64_t r = 0; r < m; ++r) {
    const auto toks = text::split_ws(in.expect("attribute row"));
    if (static_cast<std::int64_t>(toks.size()) != n) {
      throw FormatError("attribute row needs " + std::to_string(n) + " values", in.line_number());
    }
    for (std::int64_t c = 0; c < n; ++c) {
      const double v = text::parse_double(toks[c], in.line_number());
      if (!(v >= -1.0 && v <= 1.0)) throw FormatError("attribute outside [-1, 1]", in.line_number());
      d.attrs(r, c) = v;
    }
  }
  std::string_view line;
  while (in.next(line)) {
    const auto toks = text::split_ws(line);
    if (toks.empty()) continue;
    if (toks.size() != 2) throw FormatError("edge line must be '<src> <dst>'", in.line_number());
    const auto s = text::parse_int(toks[0], in.line_number());
    const auto t = text::parse_int(toks[1], in.line_number());
    if (s < 0 || t >= m || s >= t) throw FormatError("invalid edge", in.line_number());
    d.edges.push_back({static_cast<NodeId>(s), static_cast<NodeId>(t)});
  }
  if (!std::is_sorted(d.edges.begin(), d.edges.end()) ||
      std::adjacent_find(d.edges.begin(), d.edges.end()) != d.edges.end()) {
    throw FormatError("edges must be sorted and unique");
  }
  return d;
}

void save_disc(const DiscGraph& d, const std::filesystem::path& path) {
  text::write_file(path, format_disc(d));
}

DiscGraph load_disc(const std::filesystem::path& path) {
  try {
    return parse_disc(text::read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what(), e.line());
  }
}

}  // namespace gnneval
