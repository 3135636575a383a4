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

#include "gnneval/graph.hpp"

#include <algorithm>
#include <numeric>

#include "gnneval/error.hpp"
#include "text_io.hpp"

namespace gnneval {

namespace {

std::string describe_edge(const Edge& e) {
  return "(" + std::to_string(e.src) + ", " + std::to_string(e.dst) + ")";
}

// Canonicalizes and checks the edge list; returns an error message or "".
std::string canonicalize_edges(std::vector<Edge>& edges, std::size_t n) {
  for (auto& e : edges) {
    if (e.src < 0 || e.dst < 0 || static_cast<std::size_t>(e.src) >= n ||
        static_cast<std::size_t>(e.dst) >= n) {
      return "edge endpoint out of range " + describe_edge(e);
    }
    if (e.src == e.dst) return "self-loop " + describe_edge(e);
    if (e.src > e.dst) std::swap(e.src, e.dst);
  }
  std::sort(edges.begin(), edges.end());
  const auto dup = std::adjacent_find(edges.begin(), edges.end());
  if (dup != edges.end()) return "duplicate edge " + describe_edge(*dup);
  return {};
}

}  // namespace

Graph::Graph(Tensor2 features, std::vector<int> labels, std::vector<Edge> edges, int num_classes)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      edges_(std::move(edges)),
      num_classes_(num_classes) {
  if (num_classes_ <= 0) throw InvalidArgument("num_classes must be positive");
  if (static_cast<std::size_t>(features_.rows()) != labels_.size()) {
    throw InvalidArgument("feature rows (" + std::to_string(features_.rows()) +
                          ") != label count (" + std::to_string(labels_.size()) + ")");
  }
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] != kUnlabeled && (labels_[i] < 0 || labels_[i] >= num_classes_)) {
      throw InvalidArgument("label " + std::to_string(labels_[i]) + " of node " +
                            std::to_string(i) + " outside [0, " + std::to_string(num_classes_) +
                            ")");
    }
  }
  if (auto err = canonicalize_edges(edges_, labels_.size()); !err.empty()) {
    throw InvalidArgument(err);
  }
  build_csr();
}

void Graph::build_csr() {
  const std::size_t n = labels_.size();
  std::vector<std::size_t> deg(n, 0);
  for (const auto& e : edges_) {
    ++deg[e.src];
    ++deg[e.dst];
  }
  offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) offsets_[i + 1] = offsets_[i] + deg[i];
  adj_.assign(offsets_[n], 0);
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (const auto& e : edges_) {
    adj_[fill[e.src]++] = e.dst;
    adj_[fill[e.dst]++] = e.src;
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::sort(adj_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]),
              adj_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]));
  }
}

bool Graph::fully_labeled() const {
  return std::all_of(labels_.begin(), labels_.end(), [](int y) { return y != kUnlabeled; });
}

Graph Graph::with_features(Tensor2 features) const {
  if (features.rows() != features_.rows()) throw InvalidArgument("with_features: row count changed");
  Graph g = *this;
  g.features_ = std::move(features);
  return g;
}

Graph Graph::with_edges(std::vector<Edge> edges) const {
  return Graph(features_, labels_, std::move(edges), num_classes_);
}

Graph Graph::with_labels(std::vector<int> labels) const {
  return Graph(features_, std::move(labels), edges_, num_classes_);
}

Graph Graph::without_labels() const {
  Graph g = *this;
  std::fill(g.labels_.begin(), g.labels_.end(), kUnlabeled);
  return g;
}

bool Graph::operator==(const Graph& other) const {
  return num_classes_ == other.num_classes_ && labels_ == other.labels_ &&
         edges_ == other.edges_ && features_.rows() == other.features_.rows() &&
         features_.cols() == other.features_.cols() && features_ == other.features_;
}

void Split::validate(std::size_t num_nodes) const {
  std::vector<NodeId> all;
  for (const auto* ids : {&train_ids, &val_ids, &test_ids}) {
    if (!std::is_sorted(ids->begin(), ids->end()) ||
        std::adjacent_find(ids->begin(), ids->end()) != ids->end()) {
      throw InvalidArgument("split id lists must be sorted and unique");
    }
    for (NodeId id : *ids) {
      if (id < 0 || static_cast<std::size_t>(id) >= num_nodes) {
        throw InvalidArgument("split id " + std::to_string(id) + " out of range");
      }
    }
    all.insert(all.end(), ids->begin(), ids->end());
  }
  std::sort(all.begin(), all.end());
  if (std::adjacent_find(all.begin(), all.end()) != all.end()) {
    throw InvalidArgument("split id lists overlap");
  }
}

std::string format_graph(const Graph& g) {
  std::string out;
  out.reserve(g.num_nodes() * (g.feature_dim() * 12 + 8) + g.num_edges() * 12 + 64);
  out += "#gtxt v1\n";
  out += std::to_string(g.num_nodes()) + ' ' + std::to_string(g.num_edges()) + ' ' +
         std::to_string(g.feature_dim()) + ' ' + std::to_string(g.num_classes()) + '\n';
  const auto& x = g.features();
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    out += std::to_string(i);
    out += ' ';
    out += std::to_string(g.labels()[i]);
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      out += ' ';
      out += text::format_g9(x(static_cast<Eigen::Index>(i), c));
    }
    out += '\n';
  }
  for (const auto& e : g.edges()) {
    out += std::to_string(e.src) + ' ' + std::to_string(e.dst) + '\n';
  }
  return out;
}

Graph parse_graph(const std::string& text_in) {
  text::LineReader in(text_in);
  if (in.expect("'#gtxt v1' header") != "#gtxt v1") {
    throw FormatError("missing '#gtxt v1' header", 1);
  }
  const auto dims = text::split_ws(in.expect("'N M d C' line"));
  if (dims.size() != 4) throw FormatError("header must be 'N M d C'", 2);
  const auto n = text::parse_int(dims[0], 2);
  const auto m = text::parse_int(dims[1], 2);
  const auto d = text::parse_int(dims[2], 2);
  const auto c = text::parse_int(dims[3], 2);
  if (n < 0 || m < 0 || d < 0 || c <= 0) throw FormatError("header counts out of range", 2);

  Tensor2 x(n, d);
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    const auto toks = text::split_ws(in.expect("node line"));
    const std::size_t ln = in.line_number();
    if (static_cast<std::int64_t>(toks.size()) != d + 2) {
      throw FormatError("node line needs id, label and " + std::to_string(d) + " features", ln);
    }
    if (text::parse_int(toks[0], ln) != i) {
      throw FormatError("node id must equal " + std::to_string(i), ln);
    }
    const auto y = text::parse_int(toks[1], ln);
    if (y != kUnlabeled && (y < 0 || y >= c)) {
      throw FormatError("label " + std::to_string(y) + " outside [0, " + std::to_string(c) + ")",
                        ln);
    }
    labels[static_cast<std::size_t>(i)] = static_cast<int>(y);
    for (std::int64_t k = 0; k < d; ++k) x(i, k) = text::parse_double(toks[2 + k], ln);
  }

  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(m));
  std::vector<std::size_t> edge_line;
  edge_line.reserve(static_cast<std::size_t>(m));
  for (std::int64_t j = 0; j < m; ++j) {
    const auto toks = text::split_ws(in.expect("edge line"));
    const std::size_t ln = in.line_number();
    if (toks.size() != 2) throw FormatError("edge line must be '<src> <dst>'", ln);
    const auto s = text::parse_int(toks[0], ln);
    const auto t = text::parse_int(toks[1], ln);
    if (s < 0 || t < 0 || s >= n || t >= n) throw FormatError("edge endpoint out of range", ln);
    if (s == t) throw FormatError("self-loop on node " + std::to_string(s), ln);
    if (s > t) throw FormatError("edge must satisfy src < dst (directed input is rejected)", ln);
    edges.push_back({static_cast<NodeId>(s), static_cast<NodeId>(t)});
    edge_line.push_back(ln);
  }
  std::string_view rest;
  while (in.next(rest)) {
    if (!text::split_ws(rest).empty()) throw FormatError("trailing content", in.line_number());
  }

  // Duplicate detection with line attribution.
  std::vector<std::size_t> order(edges.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return edges[a] < edges[b]; });
  for (std::size_t k = 1; k < order.size(); ++k) {
    if (edges[order[k]] == edges[order[k - 1]]) {
      throw FormatError("duplicate edge " + describe_edge(edges[order[k]]), edge_line[order[k]]);
    }
  }
  return Graph(std::move(x), std::move(labels), std::move(edges), static_cast<int>(c));
}

Graph load_graph(const std::filesystem::path& path) {
  try {
    return parse_graph(text::read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what(), e.line());
  }
}

void save_graph(const Graph& g, const std::filesystem::path& path) {
  text::write_file(path, format_graph(g));
}

namespace {

void append_ids(std::string& out, const char* key, const std::vector<NodeId>& ids) {
  out += key;
  out += ':';
  for (NodeId id : ids) out += ' ' + std::to_string(id);
  out += '\n';
}

}  // namespace

Split load_split(const std::filesystem::path& path) {
  text::LineReader in(text::read_file(path));
  Split s;
  const std::pair<const char*, std::vector<NodeId>*> keys[] = {
      {"train:", &s.train_ids}, {"val:", &s.val_ids}, {"test:", &s.test_ids}};
  for (const auto& [key, ids] : keys) {
    const auto toks = text::split_ws(in.expect(key));
    if (toks.empty() || toks[0] != key) {
      throw FormatError(path.string() + ": expected '" + key + "'", in.line_number());
    }
    for (std::size_t k = 1; k < toks.size(); ++k) {
      ids->push_back(static_cast<NodeId>(text::parse_int(toks[k], in.line_number())));
    }
  }
  return s;
}

void save_split(const Split& split, const std::filesystem::path& path) {
  std::string out;
  append_ids(out, "train", split.train_ids);
  append_ids(out, "val", split.val_ids);
  append_ids(out, "test", split.test_ids);
  text::write_file(path, out);
}

Split random_split(std::size_t num_nodes, double train_fraction, double val_fraction, Rng& rng) {
  if (train_fraction <= 0 || val_fraction <= 0 || train_fraction + val_fraction >= 1.0) {
    throw InvalidArgument("split fractions must be positive and sum below 1");
  }
  auto perm = rng.sample_without_replacement(num_nodes, num_nodes);
  const auto n_train = static_cast<std::size_t>(std::lround(train_fraction * num_nodes));
  const auto n_val = static_cast<std::size_t>(std::lround(val_fraction * num_nodes));
  Split s;
  for (std::size_t k = 0; k < num_nodes; ++k) {
    auto& dst = k < n_train ? s.train_ids : (k < n_train + n_val ? s.val_ids : s.test_ids);
    dst.push_back(static_cast<NodeId>(perm[k]));
  }
  for (auto* ids : {&s.train_ids, &s.val_ids, &s.test_ids}) std::sort(ids->begin(), ids->end());
  return s;
}

Graph induced_subgraph(const Graph& g, std::span<const NodeId> ids) {
  if (ids.empty()) throw InvalidArgument("induced_subgraph: empty id list");
  const std::size_t n = g.num_nodes();
  std::vector<NodeId> remap(n, -1);
  for (std::size_t k = 0; k < ids.size(); ++k) {
    const NodeId id = ids[k];
    if (id < 0 || static_cast<std::size_t>(id) >= n) {
      throw InvalidArgument("induced_subgraph: id " + std::to_string(id) + " out of range");
    }
    if (k > 0 && ids[k - 1] >= id) throw InvalidArgument("induced_subgraph: ids must be sorted and unique");
    remap[id] = static_cast<NodeId>(k);
  }
  Tensor2 x(static_cast<Eigen::Index>(ids.size()), g.features().cols());
  std::vector<int> labels(ids.size());
  for (std::size_t k = 0; k < ids.size(); ++k) {
    x.row(static_cast<Eigen::Index>(k)) = g.features().row(ids[k]);
    labels[k] = g.labels()[ids[k]];
  }
  std::vector<Edge> edges;
  for (const auto& e : g.edges()) {
    if (remap[e.src] >= 0 && remap[e.dst] >= 0) edges.push_back({remap[e.src], remap[e.dst]});
  }
  return Graph(std::move(x), std::move(labels), std::move(edges), g.num_classes());
}

Graph generate_sbm(std::uint64_t seed, const SbmParams& params) {
  if (params.p_in < 0 || params.p_in > 1 || params.p_out < 0 || params.p_out > 1) {
    throw InvalidArgument("generate_sbm: probabilities must lie in [0, 1]");
  }
  if (params.blocks.empty()) throw InvalidArgument("generate_sbm: no blocks");
  int num_classes = 0;
  std::size_t n = 0;
  for (const auto& b : params.blocks) {
    if (b.size == 0) throw InvalidArgument("generate_sbm: block size must be positive");
    if (b.class_id < 0) throw InvalidArgument("generate_sbm: negative class id");
    num_classes = std::max(num_classes, b.class_id + 1);
    n += b.size;
  }
  if (params.feature_means.size() < static_cast<std::size_t>(num_classes)) {
    throw InvalidArgument("generate_sbm: need one feature mean per class");
  }
  const std::size_t d = params.feature_means.front().size();
  for (const auto& mu : params.feature_means) {
    if (mu.size() != d) throw InvalidArgument("generate_sbm: feature means differ in length");
  }

  Rng root(seed);
  Rng edge_rng = root.split(0);
  Rng feat_rng = root.split(1);

  std::vector<int> labels;
  std::vector<std::size_t> block_of;
  labels.reserve(n);
  for (std::size_t b = 0; b < params.blocks.size(); ++b) {
    for (std::size_t k = 0; k < params.blocks[b].size; ++k) {
      labels.push_back(params.blocks[b].class_id);
      block_of.push_back(b);
    }
  }

  std::vector<Edge> edges;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      const double p = block_of[u] == block_of[v] ? params.p_in : params.p_out;
      if (edge_rng.uniform() < p) edges.push_back({static_cast<NodeId>(u), static_cast<NodeId>(v)});
    }
  }

  Tensor2 x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& mu = params.feature_means[static_cast<std::size_t>(labels[i])];
    for (std::size_t k = 0; k < d; ++k) {
      const double v = mu[k] + params.feature_noise * feat_rng.normal();
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          text::parse_double(text::format_g9(v), 0);
    }
  }
  return Graph(std::move(x), std::move(labels), std::move(edges), num_classes);
}

std::string graph_fingerprint(const Graph& g) {
  return text::hex16(text::fnv1a(format_graph(g)));
}

std::string check_graph_invariants(const Graph& g) {
  const std::size_t n = g.num_nodes();
  if (static_cast<std::size_t>(g.features().rows()) != n) return "feature rows != node count";
  if (!g.features().allFinite()) return "non-finite feature";
  for (int y : g.labels()) {
    if (y != kUnlabeled && (y < 0 || y >= g.num_classes())) return "label out of range";
  }
  const auto edges = g.edges();
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto& e = edges[k];
    if (e.src < 0 || static_cast<std::size_t>(e.dst) >= n) return "endpoint out of range";
    if (e.src >= e.dst) return "edge not canonical (src < dst)";
    if (k > 0 && !(edges[k - 1] < e)) return "edges not sorted/unique";
  }
  std::size_t total = 0;
  for (std::size_t u = 0; u < n; ++u) {
    for (NodeId v : g.neighbors(static_cast<NodeId>(u))) {
      const auto nv = g.neighbors(v);
      if (!std::binary_search(nv.begin(), nv.end(), static_cast<NodeId>(u))) {
        return "CSR not symmetric";
      }
      if (v == static_cast<NodeId>(u)) return "self-loop in CSR";
    }
    total += g.degree(static_cast<NodeId>(u));
  }
  if (total != 2 * edges.size()) return "CSR size mismatch";
  return {};
}

}  // namespace gnneval
