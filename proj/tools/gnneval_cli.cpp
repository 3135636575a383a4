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

// gnneval command-line driver. Each subcommand runs one pipeline stage against
// the artifacts under the configured output directory.

#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>

#include "gnneval/error.hpp"
#include "gnneval/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct GlobalFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::string out;
  bool with_truth = false;
  bool quiet = false;
};

gnneval::RunConfig resolve_config(const GlobalFlags& flags) {
  gnneval::KeyValueConfig kv;
  std::filesystem::path base;
  if (!flags.config.empty()) {
    kv = gnneval::KeyValueConfig::load(flags.config);
    base = std::filesystem::path(flags.config).parent_path();
  }
  // Command-line flags win over the file. Relative --out is taken as given.
  if (flags.seed) kv.set("seed", std::to_string(*flags.seed));
  if (flags.threads) kv.set("threads", std::to_string(*flags.threads));
  if (!flags.out.empty()) kv.set("out", std::filesystem::absolute(flags.out).string());
  return gnneval::RunConfig::from(kv, base);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gnneval: label-free accuracy estimation for trained GNNs"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags flags;
  app.add_option("--config", flags.config, "key = value run config")->check(CLI::ExistingFile);
  app.add_option("--seed", flags.seed, "global seed (overrides config)");
  app.add_option("--threads", flags.threads, "worker threads for per-model stages")
      ->check(CLI::PositiveNumber);
  app.add_option("--out", flags.out, "output directory (overrides config)");
  app.add_flag("--with-truth", flags.with_truth, "read target labels to report true accuracy");
  app.add_flag("-q,--quiet", flags.quiet, "only log warnings and errors");

  using Stage = std::function<void(const gnneval::RunConfig&, const gnneval::StageOptions&)>;
  std::vector<std::pair<CLI::App*, Stage>> stages;
  auto stage = [&](const char* name, const char* help, Stage fn) {
    stages.emplace_back(app.add_subcommand(name, help), std::move(fn));
  };
  stage("gen-sbm", "generate the synthetic SBM source, split and shifted targets",
        [](const auto& c, const auto& o) { gnneval::cmd_gen_sbm(c, o); });
  stage("train-gnn", "train one classifier per (arch, seed)",
        [](const auto& c, const auto& o) { gnneval::cmd_train_gnn(c, o); });
  stage("build-discgraphs", "synthesize meta-graphs and labeled DiscGraphs",
        [](const auto& c, const auto& o) { gnneval::cmd_build_discgraphs(c, o); });
  stage("train-evaluator", "fit one GNNEvaluator per trained classifier",
        [](const auto& c, const auto& o) { gnneval::cmd_train_evaluator(c, o); });
  stage("estimate", "estimate accuracy on every target graph",
        [](const auto& c, const auto& o) { gnneval::cmd_estimate(c, o); });
  stage("baseline", "run the ATC, threshold and AutoEval-G baselines",
        [](const auto& c, const auto& o) { gnneval::cmd_baseline(c, o); });
  stage("report", "aggregate results into the MAE table",
        [](const auto& c, const auto& o) { gnneval::cmd_report(c, o); });
  stage("run", "every stage in order",
        [](const auto& c, const auto& o) { gnneval::run_pipeline(c, o); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  spdlog::set_pattern("[%H:%M:%S] [%l] %v");
  if (flags.quiet) spdlog::set_level(spdlog::level::warn);

  try {
    const gnneval::RunConfig cfg = resolve_config(flags);
    gnneval::StageOptions opts;
    opts.with_truth = flags.with_truth;
    opts.log = [](const std::string& msg) {
      if (msg.find("warning:") != std::string::npos) spdlog::warn("{}", msg);
      else spdlog::info("{}", msg);
    };
    for (const auto& [sub, fn] : stages) {
      if (sub->parsed()) fn(cfg, opts);
    }
  } catch (const gnneval::NumericError& e) {
    spdlog::error("numeric failure: {}", e.what());
    return kExitNumeric;
  } catch (const gnneval::ConfigError& e) {
    spdlog::error("config error: {}", e.what());
    return kExitConfig;
  } catch (const gnneval::FormatError& e) {
    spdlog::error("format error: {}", e.what());
    return kExitConfig;
  } catch (const gnneval::InvalidArgument& e) {
    spdlog::error("invalid argument: {}", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitFailure;
  }
  return kExitOk;
}
