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
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gnneval/augment.hpp"
#include "gnneval/baselines.hpp"
#include "gnneval/discrepancy.hpp"
#include "gnneval/evaluator.hpp"
#include "gnneval/models.hpp"

namespace gnneval {

/// Flat `key = value` text config. '#' starts a comment; blank lines are ignored.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(const std::string& text);
  static KeyValueConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

struct TargetSpec {
  std::string name;
  std::filesystem::path path;
};

/// Synthetic SBM source graph and shifted targets.
struct SbmSetup {
  std::size_t nodes = 600;
  int classes = 3;
  std::size_t feature_dim = 16;
  double p_in = 0.03;
  double p_out = 0.012;
  double mean_scale = 0.7;
  double noise = 1.0;
  double train_fraction = 0.4;
  double val_fraction = 0.3;
  /// Target recipes: "edge_drop:P", "attr_mask:P", "noise:F" (feature-noise
  /// multiplier), "clean", or "mixed" (noise x1.5, edge drop 0.3, attr mask 0.2).
  std::vector<std::string> targets{"edge_drop:0.3", "edge_drop:0.6", "noise:2", "attr_mask:0.3",
                                   "mixed"};
};

struct BaselineToggles {
  bool atc = true;
  bool atc_calibrated = true;
  std::vector<double> taus{0.7, 0.8, 0.9};
  bool autoeval_g = true;
  MmdKernel mmd_kernel = MmdKernel::Linear;
};

struct RunConfig {
  std::filesystem::path out_dir = "gnneval_out";
  /// No source graph configured: gen-sbm provides source, split and targets under out_dir/data.
  bool synthetic = true;
  std::filesystem::path source;
  std::string source_name = "source";
  std::filesystem::path split;
  std::vector<TargetSpec> targets;
  std::vector<Arch> archs{Arch::GCN, Arch::SAGE, Arch::GAT, Arch::GIN, Arch::MLP};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  int max_epochs = 200;
  int patience = 20;
  std::size_t hidden_dim = 128;
  std::size_t embed_dim = 16;
  /// Per-architecture overrides of the default lr / wd.
  std::map<Arch, double> lr;
  std::map<Arch, double> wd;
  AugmentConfig augment;
  EvaluatorConfig evaluator;
  DiscNorm disc_norm = DiscNorm::RowCosine;
  BaselineToggles baselines;
  SbmSetup sbm;
  bool heatmap = false;
  std::uint64_t seed = 0;
  unsigned threads = 1;

  /// Parses a config; relative paths resolve against `base_dir`. Unknown
  /// keys and bad values raise ConfigError.
  static RunConfig from(const KeyValueConfig& kv, const std::filesystem::path& base_dir = {});
  static RunConfig load(const std::filesystem::path& path);

  /// Every effective setting as sorted `key = value` lines.
  std::string materialize() const;

  ModelConfig model_config(Arch arch, std::size_t input_dim, int num_classes,
                           std::uint64_t model_seed) const;
  /// Configured paths, or the gen-sbm locations under out_dir/data when synthetic.
  std::filesystem::path source_path() const;
  std::filesystem::path split_path() const;
  std::vector<TargetSpec> target_specs() const;

  std::filesystem::path model_path(Arch arch, std::uint64_t model_seed) const;
  std::filesystem::path disc_dir(Arch arch, std::uint64_t model_seed) const;
  std::filesystem::path evaluator_path(Arch arch, std::uint64_t model_seed) const;
  std::filesystem::path meta_dir() const { return out_dir / "meta"; }
  std::filesystem::path results_dir() const { return out_dir / "results"; }
  std::filesystem::path report_dir() const { return out_dir / "report"; }
};

/// Run-time switches that are not part of the config file.
struct StageOptions {
  bool with_truth = false;
  std::function<void(const std::string&)> log;
};

/// One line of a results CSV.
struct ResultRow {
  std::string method;
  std::string model;
  std::uint64_t seed = 0;
  std::string source;
  std::string target;
  double estimate = 0.0;
  std::optional<double> truth;

  std::optional<double> abs_error() const;
};

inline constexpr std::string_view kResultsHeader =
    "method,model,seed,source,target,estimate,truth,abs_error";

std::string format_results(const std::vector<ResultRow>& rows);
std::vector<ResultRow> parse_results(const std::string& text);

struct TrainCell {
  Arch arch = Arch::GCN;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::string model_id;
  int best_epoch = 0;
  double val_accuracy = 0.0;
  double test_accuracy = 0.0;
};

/// Writes data/source.gtxt, data/source.split and data/target_<name>.gtxt.
std::vector<TargetSpec> cmd_gen_sbm(const RunConfig& cfg, const StageOptions& opts = {});

/// One checkpoint per (arch, seed) plus models/manifest.csv. A failing cell is
/// recorded and the others proceed.
std::vector<TrainCell> cmd_train_gnn(const RunConfig& cfg, const StageOptions& opts = {});

struct DiscSetSummary {
  std::size_t count = 0;
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double stddev = 0.0;
};

/// K labeled DiscGraphs per trained model, with manifest.csv and summary.csv.
std::map<std::string, DiscSetSummary> cmd_build_discgraphs(const RunConfig& cfg,
                                                           const StageOptions& opts = {});

/// Reads a disc directory written by cmd_build_discgraphs.
std::vector<DiscGraph> load_disc_set(const std::filesystem::path& dir);

void cmd_train_evaluator(const RunConfig& cfg, const StageOptions& opts = {});

/// GNNEvaluator estimates for every (arch, seed, target); writes results/gnnevaluator.csv.
std::vector<ResultRow> cmd_estimate(const RunConfig& cfg, const StageOptions& opts = {});

/// ATC (MC/NE, raw and calibrated), fixed thresholds and AutoEval-G; writes results/baselines.csv.
std::vector<ResultRow> cmd_baseline(const RunConfig& cfg, const StageOptions& opts = {});

struct MaeCell {
  std::string method;
  std::string source;
  std::string target;
  std::map<std::string, std::optional<double>> per_arch;  // arch -> MAE in percentage points
  std::optional<double> average;
};

/// Mean |estimate - truth| * 100 over seeds, per (method, source, target, arch).
std::vector<MaeCell> aggregate_mae(const std::vector<ResultRow>& rows);
std::string format_mae_table(const std::vector<MaeCell>& cells);

/// Aggregates every results/*.csv into report/mae.csv (and heatmap CSVs when enabled).
std::vector<MaeCell> cmd_report(const RunConfig& cfg, const StageOptions& opts = {});

/// gen-sbm (when no source is configured), train-gnn, build-discgraphs,
/// train-evaluator, estimate, baseline, report.
std::vector<MaeCell> run_pipeline(const RunConfig& cfg, const StageOptions& opts = {});

}  // namespace gnneval
