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
#include <fstream>
#include <iterator>

#include "gnneval/error.hpp"
#include "gnneval/pipeline.hpp"
#include "test_util.hpp"

namespace gnneval {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t count_files(const fs::path& dir, const std::string& ext) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir)) n += e.path().extension() == ext ? 1 : 0;
  return n;
}

// A few-second configuration of the whole pipeline.
RunConfig tiny_config(const fs::path& out) {
  KeyValueConfig kv = KeyValueConfig::parse(
      "archs = GCN\n"
      "seeds = 0\n"
      "max_epochs = 30\n"
      "hidden_dim = 16\n"
      "K = 12\n"
      "eval.hidden_dim = 16\n"
      "eval.epochs = 20\n"
      "sbm.nodes = 90\n"
      "sbm.feature_dim = 6\n"
      "sbm.p_in = 0.15\n"
      "sbm.p_out = 0.03\n"
      "sbm.targets = edge_drop:0.5,noise:2\n");
  kv.set("out", out.string());
  return RunConfig::from(kv);
}

class PipelineTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("gnneval_pipeline_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

TEST(KeyValue, ParsesCommentsAndWhitespace) {
  const auto kv = KeyValueConfig::parse("# header\n  a = 1 \n\nb=two words # trailing\n");
  EXPECT_EQ(kv.get("a"), "1");
  EXPECT_EQ(kv.get("b"), "two words");
  EXPECT_FALSE(kv.has("c"));
  EXPECT_THROW(KeyValueConfig::parse("novalue\n"), ConfigError);
}

TEST(RunConfigTest, DefaultsAndErrors) {
  const RunConfig c = RunConfig::from(KeyValueConfig{});
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{0, 1, 2, 3, 4}));
  EXPECT_EQ(c.archs.size(), 5u);
  EXPECT_EQ(c.augment.num_graphs, 400u);
  EXPECT_EQ(c.baselines.taus, (std::vector<double>{0.7, 0.8, 0.9}));
  EXPECT_EQ(c.model_config(Arch::SAGE, 4, 2, 0).lr, 0.005);
  EXPECT_THROW(RunConfig::from(KeyValueConfig::parse("bogus = 1\n")), ConfigError);
  EXPECT_THROW(RunConfig::from(KeyValueConfig::parse("seeds = \n")), ConfigError);
  EXPECT_THROW(RunConfig::from(KeyValueConfig::parse("archs = RNN\n")), ConfigError);
  EXPECT_THROW(RunConfig::from(KeyValueConfig::parse("K = many\n")), ConfigError);
  EXPECT_THROW(RunConfig::from(KeyValueConfig::parse("source = g.gtxt\n")), ConfigError);
  EXPECT_THROW(RunConfig::from(KeyValueConfig::parse("baseline.taus = 1.5\n")), ConfigError);
}

TEST(RunConfigTest, MaterializeIsAFixedPoint) {
  const RunConfig c = RunConfig::from(KeyValueConfig::parse("K = 50\nlr.GCN = 0.02\naug.weights = 1,0,2,1\n"));
  const std::string text = c.materialize();
  const RunConfig again = RunConfig::from(KeyValueConfig::parse(text));
  EXPECT_EQ(again.materialize(), text);
  EXPECT_NE(text.find("lr.GCN = 0.02"), std::string::npos);
  EXPECT_NE(text.find("K = 50"), std::string::npos);
}

TEST(Results, FormatParseRoundTrip) {
  const std::vector<ResultRow> rows{{"GNNEvaluator", "GCN", 0, "src", "t1", 0.5, 0.55},
                                    {"ATC-MC", "GAT", 3, "src", "t2", 0.25, std::nullopt}};
  const std::string text = format_results(rows);
  EXPECT_EQ(text.substr(0, text.find('\n')), kResultsHeader);
  EXPECT_NE(text.find(",NA,NA\n"), std::string::npos);
  const auto back = parse_results(text);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].truth, 0.55);
  EXPECT_FALSE(back[1].truth.has_value());
  EXPECT_EQ(format_results(back), text);
}

TEST(Mae, SingleRowAndSeedMean) {
  const auto one = aggregate_mae({{"M", "GCN", 0, "s", "t", 0.50, 0.55}});
  ASSERT_EQ(one.size(), 1u);
  EXPECT_NEAR(*one[0].per_arch.at("GCN"), 5.0, 1e-9);
  EXPECT_NE(format_mae_table(one).find(",5.00,5.00\n"), std::string::npos);

  std::vector<ResultRow> rows;
  for (int s = 0; s < 5; ++s) rows.push_back({"M", "GCN", static_cast<std::uint64_t>(s), "s", "t", 0.5, 0.5 + 0.01 * (s + 1)});
  EXPECT_NEAR(*aggregate_mae(rows)[0].per_arch.at("GCN"), 3.0, 1e-9);
}

TEST(Mae, AverageAcrossArchsAndMissingTruth) {
  std::vector<ResultRow> rows;
  const std::pair<const char*, double> errs[] = {{"GCN", 0.02}, {"SAGE", 0.04}, {"GAT", 0.09}};
  for (const auto& [arch, e] : errs) rows.push_back({"M", arch, 0, "s", "t", 0.5, 0.5 + e});
  const auto cells = aggregate_mae(rows);
  ASSERT_EQ(cells.size(), 1u);
  EXPECT_NEAR(*cells[0].average, (2.0 + 4.0 + 9.0) / 3.0, 1e-9);
  const std::string table = format_mae_table(cells);
  EXPECT_EQ(table, "method,source,target,GCN,SAGE,GAT,Avg.\nM,s,t,2.00,4.00,9.00,5.00\n");

  rows.push_back({"M", "GIN", 0, "s", "t", 0.5, std::nullopt});
  const auto with_na = aggregate_mae(rows);
  EXPECT_FALSE(with_na[0].per_arch.at("GIN").has_value());
  EXPECT_FALSE(with_na[0].average.has_value());
  EXPECT_NE(format_mae_table(with_na).find(",NA,NA\n"), std::string::npos);
}

TEST_F(PipelineTest, StagesProduceConsistentArtifacts) {
  const RunConfig cfg = tiny_config(dir_);
  cmd_gen_sbm(cfg);
  const auto cells = cmd_train_gnn(cfg);
  ASSERT_EQ(cells.size(), 1u);
  EXPECT_TRUE(cells[0].ok);
  EXPECT_EQ(count_files(dir_ / "models", ".ckpt"), 1u);
  const std::string manifest = slurp(dir_ / "models" / "manifest.csv");
  cmd_train_gnn(cfg);
  EXPECT_EQ(slurp(dir_ / "models" / "manifest.csv"), manifest);

  const auto summaries = cmd_build_discgraphs(cfg);
  const auto& s = summaries.at("GCN_s0");
  EXPECT_EQ(s.count, 12u);
  EXPECT_LE(s.min, s.mean);
  EXPECT_LE(s.mean, s.max);
  const fs::path disc_dir = cfg.disc_dir(Arch::GCN, 0);
  EXPECT_EQ(count_files(disc_dir, ".disc"), 12u);
  const auto discs = load_disc_set(disc_dir);  // re-scan cross-checks the manifest labels
  for (const auto& d : discs) {
    EXPECT_GE(*d.label, 0.0);
    EXPECT_LE(*d.label, 1.0);
  }

  cmd_train_evaluator(cfg);
  const auto blind = cmd_estimate(cfg);
  ASSERT_EQ(blind.size(), 2u);
  for (const auto& r : blind) {
    EXPECT_FALSE(r.truth.has_value());
    EXPECT_GT(r.estimate, 0.0);
    EXPECT_LT(r.estimate, 1.0);
  }
  EXPECT_NE(slurp(cfg.results_dir() / "gnnevaluator.csv").find(",NA,NA"), std::string::npos);

  StageOptions truth;
  truth.with_truth = true;
  const auto rows = cmd_estimate(cfg, truth);
  const TrainedModel model = load_model(cfg.model_path(Arch::GCN, 0));
  for (const auto& r : rows) {
    ASSERT_TRUE(r.truth.has_value());
    EXPECT_EQ(r.estimate, blind[static_cast<std::size_t>(&r - rows.data())].estimate);
    const Graph target = load_graph(dir_ / "data" / ("target_" + r.target + ".gtxt"));
    const auto pred = embed_and_predict(model, target);
    std::size_t hit = 0;
    for (std::size_t i = 0; i < target.num_nodes(); ++i) hit += pred.labels[i] == target.labels()[i] ? 1 : 0;
    EXPECT_EQ(*r.truth, static_cast<double>(hit) / static_cast<double>(target.num_nodes()));
    EXPECT_EQ(*r.abs_error(), std::abs(r.estimate - *r.truth));
  }

  const auto base = cmd_baseline(cfg, truth);
  EXPECT_EQ(base.size(), 2u * (4 + 3 + 1));
  for (const auto& r : base) {
    EXPECT_GE(r.estimate, 0.0) << r.method;
    EXPECT_LE(r.estimate, 1.0) << r.method;
  }
  const auto mae = cmd_report(cfg);
  EXPECT_EQ(mae.size(), 2u * 9);
  EXPECT_TRUE(fs::exists(cfg.report_dir() / "mae.csv"));
}

TEST_F(PipelineTest, GridOfCheckpoints) {
  KeyValueConfig kv = KeyValueConfig::parse(
      "max_epochs = 2\nhidden_dim = 8\nembed_dim = 4\nsbm.nodes = 40\nsbm.feature_dim = 3\n");
  kv.set("out", dir_.string());
  const RunConfig cfg = RunConfig::from(kv);
  cmd_gen_sbm(cfg);
  const auto cells = cmd_train_gnn(cfg);
  EXPECT_EQ(cells.size(), 25u);
  EXPECT_EQ(count_files(dir_ / "models", ".ckpt"), 25u);
}

TEST_F(PipelineTest, MissingArtifactsAreConfigErrors) {
  const RunConfig cfg = tiny_config(dir_);
  EXPECT_THROW(cmd_report(cfg), ConfigError);
  EXPECT_ANY_THROW(cmd_train_gnn(cfg));
}

}  // namespace
}  // namespace gnneval
