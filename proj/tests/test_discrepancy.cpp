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

#include <cmath>
#include <filesystem>

#include "gnneval/augment.hpp"
#include "gnneval/discrepancy.hpp"
#include "gnneval/error.hpp"
#include "test_util.hpp"

namespace gnneval {
namespace {

using testing::random_graph;
using testing::random_matrix;

double cosine(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) {
  double dot = 0, na = 0, nb = 0;
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    dot += a(k) * b(k);
    na += a(k) * a(k);
    nb += b(k) * b(k);
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

TEST(DiscAttrs, SelfCosineDiagonal) {
  Rng rng(1);
  const Tensor2 z = random_matrix(8, 16, rng);
  const Tensor2 x = disc_attrs(z, z);
  for (Eigen::Index i = 0; i < 8; ++i) EXPECT_NEAR(x(i, i), 1.0, 1e-12);
}

TEST(DiscAttrs, OrthogonalRowsAreZero) {
  Tensor2 a(1, 2), b(1, 2);
  a << 1, 0;
  b << 0, 3;
  EXPECT_EQ(disc_attrs(a, b)(0, 0), 0.0);
}

TEST(DiscAttrs, MatchesPairwiseLoop) {
  Rng rng(2);
  const Tensor2 a = random_matrix(3, 16, rng);
  const Tensor2 b = random_matrix(4, 16, rng);
  const Tensor2 x = disc_attrs(a, b);
  ASSERT_EQ(x.rows(), 3);
  ASSERT_EQ(x.cols(), 4);
  for (Eigen::Index i = 0; i < 3; ++i) {
    for (Eigen::Index j = 0; j < 4; ++j) EXPECT_NEAR(x(i, j), cosine(a.row(i), b.row(j)), 1e-14);
  }
}

TEST(DiscAttrs, ZeroRowsAreCountedAndBounded) {
  Rng rng(3);
  Tensor2 a = random_matrix(3, 4, rng);
  a.row(1).setZero();
  std::size_t degenerate = 0;
  const Tensor2 x = disc_attrs(a, random_matrix(5, 4, rng), &degenerate);
  EXPECT_EQ(degenerate, 1u);
  EXPECT_TRUE(x.row(1).isZero(0.0));
  EXPECT_LE(x.maxCoeff(), 1.0);
  EXPECT_GE(x.minCoeff(), -1.0);
}

struct Fixture {
  Graph train;
  Split split;
  TrainedModel model;
};

Fixture trained_fixture() {
  SbmParams p;
  p.blocks = {{30, 0}, {30, 1}};
  p.p_in = 0.15;
  p.p_out = 0.02;
  p.feature_means = {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}};
  Graph g = generate_sbm(11, p);
  Rng rng(11);
  Split split = random_split(g.num_nodes(), 0.4, 0.3, rng);
  ModelConfig cfg = default_model_config(Arch::GCN, 3, 2, 0);
  cfg.hidden_dim = 16;
  cfg.max_epochs = 30;
  TrainedModel m = train_classifier(g, split, cfg);
  return {std::move(g), std::move(split), std::move(m)};
}

double brute_accuracy(const TrainedModel& m, const Graph& g) {
  const auto pred = embed_and_predict(m, g);
  const Tensor2& z = pred.logits;
  std::size_t hit = 0;
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < z.cols(); ++c) {
      if (z(r, c) > z(r, best)) best = c;
    }
    hit += static_cast<int>(best) == g.labels()[static_cast<std::size_t>(r)] ? 1 : 0;
  }
  return static_cast<double>(hit) / static_cast<double>(z.rows());
}

TEST(LabelMeta, EqualsRecount) {
  const Fixture f = trained_fixture();
  const Graph seed = seed_subgraph(f.train, f.split);
  AugmentConfig cfg;
  cfg.num_graphs = 20;
  for (const auto& mg : build_meta_set(seed, cfg)) {
    const double label = label_meta(f.model, mg);
    EXPECT_EQ(label, brute_accuracy(f.model, mg.graph));
    const double scaled = label * static_cast<double>(mg.graph.num_nodes());
    EXPECT_EQ(scaled, std::round(scaled));
  }
}

TEST(LabelMeta, AllRightAndAllWrong) {
  const Fixture f = trained_fixture();
  const Graph seed = seed_subgraph(f.train, f.split);
  const auto pred = embed_and_predict(f.model, seed);
  MetaGraph right{seed.with_labels(pred.labels), {}, {}, 0, 0};
  EXPECT_EQ(label_meta(f.model, right), 1.0);
  std::vector<int> wrong = pred.labels;
  for (auto& y : wrong) y = 1 - y;
  MetaGraph all_wrong{seed.with_labels(wrong), {}, {}, 0, 0};
  EXPECT_EQ(label_meta(f.model, all_wrong), 0.0);
}

TEST(BuildDiscGraph, ShapeLabelAndPurity) {
  const Fixture f = trained_fixture();
  const Graph seed = seed_subgraph(f.train, f.split);
  const MetaGraph untouched{seed, {}, {}, 0, 0};
  const DiscrepancyContext ctx(f.model, f.train);
  const DiscGraph d = build_discgraph(ctx, untouched);
  EXPECT_EQ(d.attrs.rows(), static_cast<Eigen::Index>(seed.num_nodes()));
  EXPECT_EQ(d.attrs.cols(), static_cast<Eigen::Index>(f.train.num_nodes()));
  ASSERT_TRUE(d.label.has_value());
  EXPECT_EQ(*d.label, brute_accuracy(f.model, seed));
  EXPECT_EQ(d, build_discgraph(ctx, untouched));
  EXPECT_EQ(d.model_id, f.model.id());
  EXPECT_EQ(d.train_graph_id, graph_fingerprint(f.train));
}

TEST(BuildDiscGraph, RejectsForeignTrainingGraph) {
  const Fixture f = trained_fixture();
  Rng rng(5);
  const Graph other = random_graph(60, 0.1, 3, 2, rng);
  EXPECT_THROW(DiscrepancyContext(f.model, other), InvalidArgument);
}

TEST(InferenceDiscGraph, SelfCaseAndPermutation) {
  const Fixture f = trained_fixture();
  const DiscrepancyContext ctx(f.model, f.train);
  const DiscGraph self = build_inference_discgraph(ctx, f.train, "self");
  EXPECT_FALSE(self.label.has_value());
  for (Eigen::Index i = 0; i < self.attrs.rows(); ++i) EXPECT_NEAR(self.attrs(i, i), 1.0, 1e-12);
  EXPECT_LE(self.attrs.maxCoeff(), 1.0);
  EXPECT_GE(self.attrs.minCoeff(), -1.0);

  Rng rng(6);
  const auto perm = testing::random_permutation(f.train.num_nodes(), rng);
  const DiscGraph moved = build_inference_discgraph(ctx, testing::permute_graph(f.train, perm), "perm");
  for (std::size_t u = 0; u < perm.size(); ++u) {
    const auto diff = (moved.attrs.row(static_cast<Eigen::Index>(perm[u])) -
                       self.attrs.row(static_cast<Eigen::Index>(u))).cwiseAbs().maxCoeff();
    EXPECT_LT(diff, 1e-12);
  }
}

TEST(DiscFile, RoundTripAndErrors) {
  const Fixture f = trained_fixture();
  const Graph seed = seed_subgraph(f.train, f.split);
  AugmentConfig cfg;
  cfg.num_graphs = 3;
  const auto metas = build_meta_set(seed, cfg);
  const DiscrepancyContext ctx(f.model, f.train);
  const auto discs = build_disc_set(ctx, metas);
  const auto path = std::filesystem::temp_directory_path() / "gnneval_test.disc";
  for (const auto& d : discs) {
    save_disc(d, path);
    const DiscGraph back = load_disc(path);
    EXPECT_EQ(format_disc(back), format_disc(d));
    EXPECT_EQ(back.label, d.label);
    EXPECT_EQ(back.edges, d.edges);
    EXPECT_LT((back.attrs - d.attrs).cwiseAbs().maxCoeff(), 1e-8);
  }
  std::filesystem::remove(path);
  const std::string text = format_disc(discs[0]);
  EXPECT_THROW(parse_disc(text.substr(0, text.size() / 2)), FormatError);
}

}  // namespace
}  // namespace gnneval
