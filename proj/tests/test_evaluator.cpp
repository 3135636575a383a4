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

#include "gnneval/error.hpp"
#include "gnneval/evaluator.hpp"
#include "test_util.hpp"

namespace gnneval {
namespace {

using testing::synthetic_disc_set;

EvaluatorConfig small_config(int epochs) {
  EvaluatorConfig cfg;
  cfg.hidden_dim = 32;
  cfg.epochs = epochs;
  cfg.lr = 1e-2;
  return cfg;
}

TEST(Evaluator, ConstantLabelsAreFit) {
  auto discs = synthetic_disc_set(12, 20, 1);
  for (auto& d : discs) d.label = 0.8;
  EvaluatorConfig cfg = small_config(300);
  cfg.val_fraction = 0.0;
  EvaluatorTrainLog log;
  const TrainedEvaluator ev = train_evaluator(discs, cfg, &log);
  EXPECT_LT(log.best_monitor_mse, 1e-4);
  EXPECT_LT(evaluator_mse(ev, discs), 1e-4);
  EXPECT_EQ(log.train_mse.size(), 301u);
  EXPECT_TRUE(log.val_mse.empty());
}

TEST(Evaluator, ValSplitAndSnapshot) {
  const auto discs = synthetic_disc_set(20, 20, 2);
  EvaluatorTrainLog log;
  const TrainedEvaluator ev = train_evaluator(discs, small_config(40), &log);
  EXPECT_EQ(log.val_indices.size(), 2u);
  EXPECT_EQ(log.train_indices.size(), 18u);
  ASSERT_EQ(log.val_mse.size(), 41u);
  const double best = *std::min_element(log.val_mse.begin(), log.val_mse.end());
  EXPECT_EQ(log.best_monitor_mse, best);
  EXPECT_EQ(log.val_mse[static_cast<std::size_t>(log.best_epoch)], best);
  std::vector<DiscGraph> val;
  for (auto i : log.val_indices) val.push_back(discs[i]);
  EXPECT_NEAR(evaluator_mse(ev, val), best, 1e-12);
}

TEST(Evaluator, DeterministicGivenSeed) {
  const auto discs = synthetic_disc_set(10, 12, 3);
  EXPECT_EQ(format_evaluator(train_evaluator(discs, small_config(20))),
            format_evaluator(train_evaluator(discs, small_config(20))));
}

TEST(Evaluator, OutputsInOpenUnitInterval) {
  const auto discs = synthetic_disc_set(10, 12, 4);
  const TrainedEvaluator ev = train_evaluator(discs, small_config(20));
  for (double e : estimate_accuracies(ev, discs)) {
    EXPECT_GT(e, 0.0);
    EXPECT_LT(e, 1.0);
  }
}

TEST(Evaluator, PermutationInvariant) {
  const auto discs = synthetic_disc_set(10, 12, 5);
  const TrainedEvaluator ev = train_evaluator(discs, small_config(30));
  Rng rng(5);
  for (const auto& d : discs) {
    const auto perm = testing::random_permutation(d.num_nodes, rng);
    EXPECT_NEAR(estimate_accuracy(ev, testing::permute_disc(d, perm)), estimate_accuracy(ev, d), 1e-9);
  }
}

TEST(Evaluator, BindingIsChecked) {
  const auto discs = synthetic_disc_set(6, 12, 6);
  const TrainedEvaluator ev = train_evaluator(discs, small_config(5));
  DiscGraph foreign = discs[0];
  foreign.model_id = "gcn-s1-other";
  EXPECT_THROW(estimate_accuracy(ev, foreign), InvalidArgument);
  auto mixed = discs;
  mixed[1].train_graph_id = "ffffffffffffffff";
  EXPECT_THROW(train_evaluator(mixed, small_config(5)), InvalidArgument);
  DiscGraph wide = discs[0];
  wide.attrs.conservativeResize(wide.attrs.rows(), 13);
  EXPECT_THROW(estimate_accuracy(ev, wide), InvalidArgument);
}

TEST(EvaluatorFile, RoundTrip) {
  const auto discs = synthetic_disc_set(8, 12, 7);
  const TrainedEvaluator ev = train_evaluator(discs, small_config(15));
  const auto path = std::filesystem::temp_directory_path() / "gnneval_test.eval";
  save_evaluator(ev, path);
  const TrainedEvaluator back = load_evaluator(path);
  EXPECT_EQ(format_evaluator(back), format_evaluator(ev));
  for (const auto& d : discs) EXPECT_EQ(estimate_accuracy(back, d), estimate_accuracy(ev, d));
  std::filesystem::remove(path);
}

TEST(EvaluatorFile, ParseErrors) {
  const auto discs = synthetic_disc_set(4, 6, 8);
  const std::string text = format_evaluator(train_evaluator(discs, small_config(2)));
  const auto nl = text.find('\n');
  const auto nl2 = text.find('\n', nl + 1);
  const std::string no_binding = text.substr(0, nl + 1) + text.substr(nl2 + 1);
  EXPECT_THROW(parse_evaluator(no_binding), FormatError);

  std::string corrupt = text;
  const auto pos = corrupt.find("conv1.bias");
  const auto row = corrupt.find('\n', pos) + 1;
  corrupt.replace(row, 3, "x!?");
  try {
    parse_evaluator(corrupt);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    const auto line = static_cast<int>(std::count(corrupt.begin(), corrupt.begin() + static_cast<long>(row), '\n')) + 1;
    EXPECT_EQ(e.line(), line);
  }
}

}  // namespace
}  // namespace gnneval
