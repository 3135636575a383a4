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

#include "gnneval/error.hpp"
#include "gnneval/gradcheck.hpp"
#include "gnneval/models.hpp"
#include "gnneval/optim.hpp"
#include "gnneval/tape.hpp"
#include "test_util.hpp"

namespace gnneval {
namespace {

using testing::random_graph;
using testing::random_matrix;

TEST(Tape, DenseZeroWeightsGiveZero) {
  ParamStore ps;
  ps.add("w", Tensor2::Zero(3, 2));
  ps.add("b", Tensor2::Zero(1, 2));
  Tape tape(ps);
  Rng rng(1);
  const Var out = tape.dense(tape.input(random_matrix(4, 3, rng)), tape.param("w"), tape.param("b"));
  EXPECT_TRUE(tape.value(out).isZero(0.0));
}

TEST(Tape, ReluValues) {
  Tape tape(ParamStore{});
  Tensor2 x(1, 3);
  x << -1, 0, 2;
  const Tensor2& y = tape.value(tape.relu(tape.input(x)));
  EXPECT_EQ(y(0, 0), 0.0);
  EXPECT_EQ(y(0, 1), 0.0);
  EXPECT_EQ(y(0, 2), 2.0);
}

TEST(Tape, DenseHandArithmetic) {
  ParamStore ps;
  Tensor2 w(2, 2);
  w << 1, 2, 3, 4;
  Tensor2 b(1, 2);
  b << 0.5, -0.5;
  ps.add("w", w);
  ps.add("b", b);
  Tape tape(ps);
  Tensor2 x(1, 2);
  x << 1, -1;
  const Tensor2& y = tape.value(tape.dense(tape.input(x), tape.param("w"), tape.param("b")));
  // [1, -1] * [[1, 2], [3, 4]] = [-2, -2]
  EXPECT_EQ(y(0, 0), -1.5);
  EXPECT_EQ(y(0, 1), -2.5);
}

TEST(Tape, IdentitySumGradientIsOnes) {
  Tape tape(ParamStore{});
  Rng rng(2);
  const Var x = tape.input(random_matrix(3, 2, rng));
  tape.backward(x, Tensor2::Ones(3, 2));
  EXPECT_TRUE(tape.grad(x).isApprox(Tensor2::Ones(3, 2)));
}

TEST(Tape, LeastSquaresGradientClosedForm) {
  Rng rng(3);
  const Tensor2 x = random_matrix(6, 3, rng);
  const Tensor2 y = random_matrix(6, 1, rng);
  ParamStore ps;
  ps.add("w", random_matrix(3, 1, rng));
  Tape tape(ps);
  const Var pred = tape.matmul(tape.constant(x), tape.param("w"));
  std::vector<double> targets(y.data(), y.data() + y.size());
  // mse = mean((XW - Y)^2), so d/dW = 2/n X^T (XW - Y).
  const GradMap g = tape.backward(tape.mse(pred, targets));
  const Tensor2 expected = 2.0 / 6.0 * x.transpose() * (x * ps.value("w") - y);
  EXPECT_LT((g.at("w") - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Tape, UntouchedParamsGetZeroGrad) {
  ParamStore ps;
  ps.add("used", Tensor2::Ones(1, 1));
  ps.add("unused", Tensor2::Ones(2, 2));
  Tape tape(ps);
  const GradMap g = tape.backward(tape.mse(tape.param("used"), std::vector<double>{0.0}));
  EXPECT_EQ(g.at("used")(0, 0), 2.0);
  EXPECT_TRUE(g.at("unused").isZero(0.0));
}

TEST(Tape, NonFiniteThrows) {
  Tape tape(ParamStore{});
  Tensor2 x(1, 1);
  x << std::numeric_limits<double>::infinity();
  EXPECT_THROW(tape.relu(tape.input(x)), NumericError);
}

TEST(Tape, SegmentMean) {
  Tape tape(ParamStore{});
  Tensor2 x(3, 1);
  x << 1, 3, 5;
  const Tensor2& y = tape.value(tape.segment_mean(tape.input(x), {0, 2, 3}));
  EXPECT_EQ(y(0, 0), 2.0);
  EXPECT_EQ(y(1, 0), 5.0);
}

TEST(GradCheck, LinearModelIsExact) {
  Rng rng(4);
  const Tensor2 x = random_matrix(5, 3, rng);
  ParamStore ps;
  ps.add("w", random_matrix(3, 1, rng));
  ps.add("b", random_matrix(1, 1, rng));
  const Tensor2 c = random_matrix(5, 1, rng);
  auto loss = [&](Tape& t) {
    const Var y = t.dense(t.constant(x), t.param("w"), t.param("b"));
    // c^T y keeps the loss linear in the parameters.
    return t.matmul(t.constant(c.transpose()), y);
  };
  EXPECT_LT(grad_check(loss, ps), 1e-8);
}

// One layer of every kind, followed by a scalar reduction through a dense
// projection and MSE.
double layer_grad_error(LayerKind kind, std::uint64_t seed) {
  Rng rng(seed);
  const Graph g = random_graph(6, 0.5, 3, 2, rng);
  const auto ops = GraphOperators::from(g);
  ParamStore ps;
  init_layer(ps, kind, "l", 3, 4, rng);
  init_layer(ps, LayerKind::Dense, "proj", 4, 1, rng);
  // Nonzero biases so the checked gradients are not trivially at a kink.
  ParamStore biased;
  for (const auto& [name, p] : ps.entries()) {
    const bool bias = name.size() > 5 && name.compare(name.size() - 5, 5, ".bias") == 0;
    biased.add(name, bias ? random_matrix(1, p.value.cols(), rng, 0.1) : p.value);
  }
  ps = biased;
  std::vector<double> targets(6);
  for (auto& t : targets) t = rng.normal();
  const Tensor2 x = g.features();
  auto loss = [&](Tape& t) {
    const Var h = layer_forward(t, kind, "l", ops, t.constant(x));
    const Var y = t.dense(h, t.param("proj.weight"), t.param("proj.bias"));
    return t.mse(y, targets);
  };
  return grad_check(loss, ps, 1e-5);
}

TEST(GradCheck, EveryLayerKind) {
  for (LayerKind kind : {LayerKind::Dense, LayerKind::GcnConv, LayerKind::SageConv,
                         LayerKind::GatConv, LayerKind::GinConv}) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      EXPECT_LT(layer_grad_error(kind, seed), 1e-4) << "kind " << static_cast<int>(kind);
    }
  }
}

TEST(GradCheck, TwoLayerGcnCrossEntropy) {
  Rng rng(5);
  const Graph g = random_graph(5, 0.5, 3, 2, rng);
  ModelConfig cfg = default_model_config(Arch::GCN, 3, 2, 5);
  cfg.hidden_dim = 4;
  cfg.out_embed_dim = 3;
  const ParamStore ps = init_classifier(cfg);
  const auto ops = GraphOperators::from(g);
  const std::vector<NodeId> rows{0, 1, 2, 3, 4};
  auto loss = [&](Tape& t) {
    const auto vars = classifier_forward(t, cfg, ops, t.constant(g.features()));
    return t.softmax_cross_entropy(vars.logits, g.labels(), rows);
  };
  EXPECT_LT(grad_check(loss, ps), 1e-4);
}

TEST(GradCheck, SigmoidMseHead) {
  Rng rng(6);
  ParamStore ps;
  ps.add("w", random_matrix(4, 1, rng));
  ps.add("b", random_matrix(1, 1, rng));
  const Tensor2 x = random_matrix(3, 4, rng);
  const std::vector<double> y{0.2, 0.5, 0.9};
  auto loss = [&](Tape& t) { return t.sigmoid_mse(t.dense(t.constant(x), t.param("w"), t.param("b")), y); };
  EXPECT_LT(grad_check(loss, ps), 1e-4);
}

TEST(GradCheck, GatOnFourNodes) {
  Tensor2 x(4, 2);
  x << 1, 0, 0, 1, 1, 1, -1, 0.5;
  const Graph g(x, {0, 1, 0, 1}, {{0, 1}, {1, 2}, {2, 3}, {0, 3}}, 2);
  const auto ops = GraphOperators::from(g);
  Rng rng(7);
  ParamStore ps;
  init_layer(ps, LayerKind::GatConv, "gat", 2, 3, rng);
  const std::vector<NodeId> rows{0, 1, 2, 3};
  auto loss = [&](Tape& t) {
    return t.softmax_cross_entropy(layer_forward(t, LayerKind::GatConv, "gat", ops, t.constant(x)),
                                   std::vector<int>{0, 1, 2, 1}, rows);
  };
  EXPECT_LT(grad_check(loss, ps), 1e-4);
}

TEST(Adam, ZeroGradientLeavesParams) {
  ParamStore ps;
  Rng rng(8);
  const Tensor2 w = random_matrix(2, 2, rng);
  ps.add("w", w);
  adam_step(ps, {{"w", Tensor2::Zero(2, 2)}}, 0.1, 0.0);
  EXPECT_EQ(ps.value("w"), w);
}

TEST(Adam, FirstStepMatchesHandEvaluation) {
  ParamStore ps;
  Tensor2 w(1, 2);
  w << 1.0, -2.0;
  ps.add("w", w);
  Tensor2 g(1, 2);
  g << 0.5, -3.0;
  const double lr = 0.01, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  adam_step(ps, {{"w", g}}, lr, 0.0);
  for (int k = 0; k < 2; ++k) {
    const double m = (1 - b1) * g(0, k), v = (1 - b2) * g(0, k) * g(0, k);
    const double mhat = m / (1 - b1), vhat = v / (1 - b2);
    const double expected = w(0, k) - lr * mhat / (std::sqrt(vhat) + eps);
    EXPECT_NEAR(ps.value("w")(0, k), expected, 1e-15);
    EXPECT_NEAR(ps.value("w")(0, k) - w(0, k), -lr * (g(0, k) > 0 ? 1 : -1), 1e-9);
  }
}

TEST(Adam, ConstantGradientDecreasesMonotonically) {
  ParamStore ps;
  ps.add("w", Tensor2::Constant(1, 1, 3.0));
  double prev = 3.0;
  for (int i = 0; i < 50; ++i) {
    adam_step(ps, {{"w", Tensor2::Constant(1, 1, 1.0)}}, 0.01, 0.0);
    EXPECT_LT(ps.value("w")(0, 0), prev);
    prev = ps.value("w")(0, 0);
  }
}

TEST(Adam, DecoupledWeightDecay) {
  ParamStore ps;
  ps.add("w", Tensor2::Constant(1, 1, 2.0));
  adam_step(ps, {{"w", Tensor2::Zero(1, 1)}}, 0.1, 0.5);
  EXPECT_DOUBLE_EQ(ps.value("w")(0, 0), 2.0 - 0.1 * 0.5 * 2.0);
}

TEST(Adam, NonFiniteGradientThrows) {
  ParamStore ps;
  ps.add("w", Tensor2::Zero(1, 1));
  EXPECT_THROW(adam_step(ps, {{"w", Tensor2::Constant(1, 1, std::nan(""))}}, 0.1, 0.0), NumericError);
}

}  // namespace
}  // namespace gnneval
