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
#include <string>
#include <vector>

#include "gnneval/discrepancy.hpp"
#include "gnneval/tape.hpp"

namespace gnneval {

enum class EvaluatorHead { Sigmoid, Linear };

struct EvaluatorConfig {
  /// Width of the discrepancy attributes, i.e. training-graph node count. 0 = infer.
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 128;
  double lr = 1e-3;
  double wd = 0.0;
  int epochs = 300;
  std::uint64_t seed = 0;
  /// Fraction of DiscGraphs held out to pick the snapshot; 0 selects on training MSE.
  double val_fraction = 0.1;
  EvaluatorHead head = EvaluatorHead::Sigmoid;

  void validate() const;
};

/// GCN(N -> hidden) -> ReLU -> GCN(hidden -> hidden) -> mean pool -> dense(hidden -> 1) -> head.
class TrainedEvaluator {
 public:
  TrainedEvaluator(EvaluatorConfig config, ParamStore params, std::string model_id,
                   std::string train_graph_id);

  const EvaluatorConfig& config() const { return config_; }
  const ParamStore& params() const { return params_; }
  const std::string& model_id() const { return model_id_; }
  const std::string& train_graph_id() const { return train_graph_id_; }

 private:
  EvaluatorConfig config_;
  ParamStore params_;
  std::string model_id_;
  std::string train_graph_id_;
};

struct EvaluatorTrainLog {
  std::vector<double> train_mse;  // per epoch, measured before that epoch's update
  std::vector<double> val_mse;    // empty when val_fraction = 0
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> val_indices;
  int best_epoch = 0;
  double best_monitor_mse = 0.0;
  double initial_monitor_mse = 0.0;
};

ParamStore init_evaluator(const EvaluatorConfig& cfg);

/// Full-batch Adam on the mean squared error between predicted and labeled
/// accuracy. Returns the snapshot with the lowest monitored MSE (val set, or
/// the training set when val_fraction = 0), earliest on ties.
TrainedEvaluator train_evaluator(const std::vector<DiscGraph>& discs, const EvaluatorConfig& cfg,
                                 EvaluatorTrainLog* log = nullptr);

/// Predicted accuracy of the bound classifier on the graph behind `d`.
double estimate_accuracy(const TrainedEvaluator& ev, const DiscGraph& d);
std::vector<double> estimate_accuracies(const TrainedEvaluator& ev,
                                        const std::vector<DiscGraph>& discs);

/// Mean squared error of the evaluator on labeled DiscGraphs.
double evaluator_mse(const TrainedEvaluator& ev, const std::vector<DiscGraph>& discs);

std::string format_evaluator(const TrainedEvaluator& ev);
TrainedEvaluator parse_evaluator(const std::string& text);
void save_evaluator(const TrainedEvaluator& ev, const std::filesystem::path& path);
TrainedEvaluator load_evaluator(const std::filesystem::path& path);

}  // namespace gnneval
