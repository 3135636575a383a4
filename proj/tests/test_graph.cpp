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

#include <gtest/gtest.h>

#include <filesystem>
#include <string>

#include "gnneval/error.hpp"
#include "gnneval/graph.hpp"
#include "test_util.hpp"

namespace gnneval {
namespace {

using testing::random_graph;

const char* kPath3 =
    "#gtxt v1\n"
    "3 2 2 2\n"
    "0 0 1.5 -2\n"
    "1 1 0 0.25\n"
    "2 0 3 4\n"
    "0 1\n"
    "1 2\n";

int format_error_line(const std::string& text) {
  try {
    parse_graph(text);
  } catch (const FormatError& e) {
    return e.line();
  }
  return -1;
}

TEST(GraphIo, PathGraphDegrees) {
  const Graph g = parse_graph(kPath3);
  ASSERT_EQ(g.num_nodes(), 3u);
  EXPECT_EQ(g.num_edges(), 2u);
  EXPECT_EQ(g.feature_dim(), 2u);
  EXPECT_EQ(g.num_classes(), 2);
  EXPECT_EQ(g.degree(0), 1u);
  EXPECT_EQ(g.degree(1), 2u);
  EXPECT_EQ(g.degree(2), 1u);
  EXPECT_EQ(g.features()(0, 1), -2.0);
  EXPECT_EQ(g.labels()[1], 1);
}

TEST(GraphIo, SelfLoopReportsLine) {
  const std::string text = "#gtxt v1\n2 1 1 2\n0 0 1\n1 1 2\n0 0\n";
  EXPECT_EQ(format_error_line(text), 5);
}

TEST(GraphIo, RejectsDuplicateAndReversedEdges) {
  EXPECT_EQ(format_error_line("#gtxt v1\n2 2 1 2\n0 0 1\n1 1 2\n0 1\n0 1\n"), 6);
  EXPECT_EQ(format_error_line("#gtxt v1\n2 1 1 2\n0 0 1\n1 1 2\n1 0\n"), 5);
}

TEST(GraphIo, RejectsBadLabelsAndTruncation) {
  EXPECT_EQ(format_error_line("#gtxt v1\n2 0 1 2\n0 2 1\n1 1 2\n"), 3);
  EXPECT_GT(format_error_line("#gtxt v1\n3 0 1 2\n0 0 1\n1 1 2\n"), 0);
  EXPECT_EQ(format_error_line("#gtxt v1\n2 1 1 2\n0 0 1\n1 1 2\n0 5\n"), 5);
  EXPECT_EQ(format_error_line("#gtxt v1\n2 0 1 2\n0 0 1\n1 1 2\nextra\n"), 5);
}

TEST(GraphIo, EmptyEdgesAndUnlabeled) {
  Tensor2 x(2, 1);
  x << 1, 2;
  const Graph g(x, {kUnlabeled, 0}, {}, 2);
  const std::string text = format_graph(g);
  EXPECT_EQ(text, "#gtxt v1\n2 0 1 2\n0 -1 1\n1 0 2\n");
  EXPECT_EQ(parse_graph(text), g);
  EXPECT_FALSE(g.fully_labeled());
}

TEST(GraphIo, RoundTripIsByteIdentical) {
  Rng rng(11);
  const Graph g = random_graph(50, 0.1, 4, 3, rng);
  const auto dir = std::filesystem::temp_directory_path() / "gnneval_graph_rt";
  std::filesystem::create_directories(dir);
  save_graph(g, dir / "a.gtxt");
  const Graph back = load_graph(dir / "a.gtxt");
  EXPECT_EQ(back, g);
  save_graph(back, dir / "b.gtxt");
  EXPECT_EQ(format_graph(back), format_graph(g));
  EXPECT_EQ(graph_fingerprint(back), graph_fingerprint(g));
  std::filesystem::remove_all(dir);
}

TEST(GraphIo, SbmRoundTrip) {
  SbmParams p;
  p.blocks = {{25, 0}, {25, 1}};
  p.p_in = 0.2;
  p.p_out = 0.02;
  p.feature_means = {{1.0, 0.0}, {0.0, 1.0}};
  const Graph g = generate_sbm(5, p);
  EXPECT_EQ(parse_graph(format_graph(g)), g);
  EXPECT_EQ(check_graph_invariants(g), "");
}

TEST(GraphIo, SplitRoundTrip) {
  Rng rng(3);
  const Split s = random_split(40, 0.5, 0.25, rng);
  s.validate(40);
  EXPECT_EQ(s.train_ids.size(), 20u);
  EXPECT_EQ(s.val_ids.size(), 10u);
  EXPECT_EQ(s.test_ids.size(), 10u);
  const auto path = std::filesystem::temp_directory_path() / "gnneval_split.txt";
  save_split(s, path);
  const Split back = load_split(path);
  EXPECT_EQ(back.train_ids, s.train_ids);
  EXPECT_EQ(back.val_ids, s.val_ids);
  EXPECT_EQ(back.test_ids, s.test_ids);
  std::filesystem::remove(path);
}

TEST(Graph, ConstructorCanonicalizes) {
  Tensor2 x = Tensor2::Zero(3, 1);
  const Graph g(x, {0, 0, 0}, {{2, 1}, {1, 0}}, 1);
  ASSERT_EQ(g.num_edges(), 2u);
  EXPECT_EQ(g.edges()[0], (Edge{0, 1}));
  EXPECT_EQ(g.edges()[1], (Edge{1, 2}));
  EXPECT_THROW(Graph(x, {0, 0, 0}, {{1, 1}}, 1), InvalidArgument);
  EXPECT_THROW(Graph(x, {0, 0, 0}, {{0, 1}, {1, 0}}, 1), InvalidArgument);
  EXPECT_THROW(Graph(x, {0, 0, 3}, {}, 2), InvalidArgument);
}

TEST(Subgraph, IdentityAndPath) {
  Rng rng(2);
  const Graph g = random_graph(12, 0.3, 2, 2, rng);
  std::vector<NodeId> all(12);
  for (int i = 0; i < 12; ++i) all[static_cast<std::size_t>(i)] = i;
  EXPECT_EQ(induced_subgraph(g, all), g);

  const Graph path = parse_graph(kPath3);
  const std::vector<NodeId> ends{0, 2};
  const Graph sub = induced_subgraph(path, ends);
  EXPECT_EQ(sub.num_nodes(), 2u);
  EXPECT_EQ(sub.num_edges(), 0u);
  EXPECT_EQ(sub.features()(1, 0), 3.0);
}

TEST(Subgraph, EdgeCountMatchesBruteForce) {
  Rng rng(17);
  const Graph g = random_graph(100, 0.08, 2, 2, rng);
  for (int trial = 0; trial < 10; ++trial) {
    auto picked = rng.sample_without_replacement(100, 40);
    std::vector<NodeId> ids(picked.begin(), picked.end());
    std::sort(ids.begin(), ids.end());
    const Graph sub = induced_subgraph(g, ids);
    EXPECT_EQ(sub.num_nodes(), 40u);
    EXPECT_EQ(sub.num_edges(), testing::count_induced_edges(g, ids));
  }
}

TEST(Sbm, DeterministicExtremes) {
  SbmParams p;
  p.blocks = {{3, 0}, {3, 1}};
  p.p_in = 1.0;
  p.p_out = 0.0;
  p.feature_means = {{0.0}, {1.0}};
  const Graph cliques = generate_sbm(1, p);
  EXPECT_EQ(cliques.num_edges(), 6u);
  for (const auto& e : cliques.edges()) EXPECT_EQ(cliques.labels()[e.src], cliques.labels()[e.dst]);
  p.p_in = 0.0;
  EXPECT_EQ(generate_sbm(1, p).num_edges(), 0u);
}

TEST(Sbm, EdgeCountNearBinomialMean) {
  SbmParams p;
  p.blocks = {{100, 0}, {100, 1}};
  p.p_in = 0.1;
  p.p_out = 0.01;
  p.feature_means = {{0.0}, {1.0}};
  const Graph g = generate_sbm(42, p);
  const double in_pairs = 2.0 * 100 * 99 / 2, out_pairs = 100.0 * 100;
  const double mean = 0.1 * in_pairs + 0.01 * out_pairs;
  const double sd = std::sqrt(in_pairs * 0.1 * 0.9 + out_pairs * 0.01 * 0.99);
  EXPECT_NEAR(static_cast<double>(g.num_edges()), mean, 4 * sd);
  EXPECT_EQ(generate_sbm(42, p), g);
}

}  // namespace
}  // namespace gnneval
