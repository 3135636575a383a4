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

#include <span>
#include <string_view>
#include <vector>

#include "gnneval/tensor.hpp"

namespace gnneval {

/// Pre-softmax classifier outputs with optional ground truth (needed only
/// for fitting thresholds and temperatures).
struct ScoredLogits {
  Tensor2 logits;
  std::vector<int> labels;
};

enum class ConfidenceScore {
  MaxConfidence,    // max_k p_k
  NegativeEntropy,  // sum_k p_k log p_k, 0 log 0 = 0
};

std::string_view score_name(ConfidenceScore s);

Tensor2 softmax_rows(const Tensor2& logits, double temperature = 1.0);
std::vector<double> confidence_scores(const Tensor2& logits, ConfidenceScore score,
                                      double temperature = 1.0);

/// Fraction of entries strictly below t.
double fraction_below(std::span<const double> scores, double t);

struct AtcThreshold {
  double threshold = 0.0;
  ConfidenceScore score = ConfidenceScore::MaxConfidence;
  double temperature = 1.0;
};

/// Threshold t such that the fraction of validation scores below t matches
/// the validation error rate: with k errors among n, t is the (k+1)-th
/// smallest score, or just above the maximum when every prediction is wrong.
AtcThreshold atc_fit_threshold(const ScoredLogits& val, ConfidenceScore score,
                               double temperature = 1.0);

/// Fraction of target scores at or above the fitted threshold. `score` must
/// match the one used for fitting.
double atc_estimate(const ScoredLogits& target, const AtcThreshold& fit, ConfidenceScore score);

/// Mean negative log-likelihood of softmax(z / T).
double temperature_nll(const ScoredLogits& val, double temperature);

/// 200 log-spaced temperatures on [0.05, 10].
std::vector<double> default_temperature_grid();

/// Grid argmin of temperature_nll; ties resolve to the smallest temperature.
double temperature_calibrate(const ScoredLogits& val);
double temperature_calibrate(const ScoredLogits& val, std::span<const double> grid);

/// Fraction of rows whose max softmax probability exceeds tau.
double threshold_estimate(const ScoredLogits& target, double tau);

enum class MmdKernel {
  Linear,  // |mean(a) - mean(b)|^2
  Rbf,     // biased MMD^2 with a Gaussian kernel, bandwidth = median pairwise distance
};

std::string_view kernel_name(MmdKernel k);

double mmd(const Tensor2& a, const Tensor2& b, MmdKernel kernel = MmdKernel::Linear);

struct AutoEvalGModel {
  double w1 = 0.0;
  double w0 = 0.0;
  MmdKernel kernel = MmdKernel::Linear;
};

/// Closed-form 1-D least squares of labels on features.
AutoEvalGModel autoeval_g_fit(std::span<const double> features, std::span<const double> labels,
                              MmdKernel kernel = MmdKernel::Linear);

/// w1 * feature + w0, clamped to [0, 1].
double autoeval_g_estimate(const AutoEvalGModel& m, double feature);
/// Same without the clamp.
double autoeval_g_raw(const AutoEvalGModel& m, double feature);

}  // namespace gnneval
