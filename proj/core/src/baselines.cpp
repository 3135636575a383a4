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

#include "gnneval/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gnneval/error.hpp"

namespace gnneval {

std::string_view score_name(ConfidenceScore s) {
  return s == ConfidenceScore::MaxConfidence ? "MC" : "NE";
}

std::string_view kernel_name(MmdKernel k) { return k == MmdKernel::Linear ? "linear" : "rbf"; }

Tensor2 softmax_rows(const Tensor2& logits, double temperature) {
  if (!(temperature > 0)) throw InvalidArgument("softmax: temperature must be positive");
  Tensor2 p = logits / temperature;
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    p.row(r).array() -= p.row(r).maxCoeff();
    p.row(r) = p.row(r).array().exp().matrix();
    p.row(r) /= p.row(r).sum();
  }
  return p;
}

std::vector<double> confidence_scores(const Tensor2& logits, ConfidenceScore score,
                                      double temperature) {
  const Tensor2 p = softmax_rows(logits, temperature);
  std::vector<double> out(static_cast<std::size_t>(p.rows()));
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    if (score == ConfidenceScore::MaxConfidence) {
      out[static_cast<std::size_t>(r)] = p.row(r).maxCoeff();
    } else {
      double s = 0.0;
      for (Eigen::Index c = 0; c < p.cols(); ++c) {
        if (p(r, c) > 0.0) s += p(r, c) * std::log(p(r, c));
      }
      out[static_cast<std::size_t>(r)] = s;
    }
  }
  return out;
}

double fraction_below(std::span<const double> scores, double t) {
  if (scores.empty()) throw InvalidArgument("fraction_below: empty input");
  const auto k = std::count_if(scores.begin(), scores.end(), [t](double s) { return s < t; });
  return static_cast<double>(k) / static_cast<double>(scores.size());
}

namespace {

void check_labeled(const ScoredLogits& s, const char* what) {
  if (s.logits.rows() == 0) throw InvalidArgument(std::string(what) + ": empty set");
  if (s.labels.size() != static_cast<std::size_t>(s.logits.rows())) {
    throw InvalidArgument(std::string(what) + ": labels required");
  }
  for (int y : s.labels) {
    if (y < 0 || y >= s.logits.cols()) throw InvalidArgument(std::string(what) + ": label out of range");
  }
}

}  // namespace

AtcThreshold atc_fit_threshold(const ScoredLogits& val, ConfidenceScore score, double temperature) {
  check_labeled(val, "atc_fit_threshold");
  auto scores = confidence_scores(val.logits, score, temperature);
  std::size_t errors = 0;
  for (Eigen::Index r = 0; r < val.logits.rows(); ++r) {
    Eigen::Index pred = 0;
    val.logits.row(r).maxCoeff(&pred);
    errors += pred != val.labels[static_cast<std::size_t>(r)] ? 1 : 0;
  }
  std::sort(scores.begin(), scores.end());
  const double t = errors < scores.size()
                       ? scores[errors]
                       : std::nextafter(scores.back(), std::numeric_limits<double>::infinity());
  return {t, score, temperature};
}

double atc_estimate(const ScoredLogits& target, const AtcThreshold& fit, ConfidenceScore score) {
  if (score != fit.score) throw InvalidArgument("atc_estimate: score function differs from the fitted one");
  const auto scores = confidence_scores(target.logits, score, fit.temperature);
  return 1.0 - fraction_below(scores, fit.threshold);
}

double temperature_nll(const ScoredLogits& val, double temperature) {
  check_labeled(val, "temperature_nll");
  double total = 0.0;
  for (Eigen::Index r = 0; r < val.logits.rows(); ++r) {
    const Eigen::RowVectorXd z = val.logits.row(r) / temperature;
    const double mx = z.maxCoeff();
    const double lse = mx + std::log((z.array() - mx).exp().sum());
    total += lse - z(val.labels[static_cast<std::size_t>(r)]);
  }
  return total / static_cast<double>(val.logits.rows());
}

std::vector<double> default_temperature_grid() {
  constexpr int kPoints = 200;
  const double lo = std::log(0.05), hi = std::log(10.0);
  std::vector<double> grid(kPoints);
  for (int i = 0; i < kPoints; ++i) grid[i] = std::exp(lo + (hi - lo) * i / (kPoints - 1));
  return grid;
}

double temperature_calibrate(const ScoredLogits& val) {
  const auto grid = default_temperature_grid();
  return temperature_calibrate(val, grid);
}

double temperature_calibrate(const ScoredLogits& val, std::span<const double> grid) {
  if (grid.empty()) throw InvalidArgument("temperature_calibrate: empty grid");
  std::vector<double> sorted(grid.begin(), grid.end());
  std::sort(sorted.begin(), sorted.end());
  double best_t = sorted.front();
  double best = std::numeric_limits<double>::infinity();
  for (double t : sorted) {
    const double v = temperature_nll(val, t);
    if (v < best) {
      best = v;
      best_t = t;
    }
  }
  return best_t;
}

double threshold_estimate(const ScoredLogits& target, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw InvalidArgument("threshold_estimate: tau must lie in (0, 1)");
  const auto conf = confidence_scores(target.logits, ConfidenceScore::MaxConfidence);
  if (conf.empty()) throw InvalidArgument("threshold_estimate: empty target");
  const auto k = std::count_if(conf.begin(), conf.end(), [tau](double c) { return c > tau; });
  return static_cast<double>(k) / static_cast<double>(conf.size());
}

namespace {

double median_pairwise_distance(const Tensor2& a, const Tensor2& b) {
  Tensor2 all(a.rows() + b.rows(), a.cols());
  all << a, b;
  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(all.rows() * (all.rows() - 1) / 2));
  for (Eigen::Index i = 0; i < all.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < all.rows(); ++j) d.push_back((all.row(i) - all.row(j)).norm());
  }
  if (d.empty()) return 1.0;
  const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  return *mid > 0.0 ? *mid : 1.0;
}

double mean_kernel(const Tensor2& x, const Tensor2& y, double gamma) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    s += (-gamma * (y.rowwise() - x.row(i)).rowwise().squaredNorm().array()).exp().sum();
  }
  return s / static_cast<double>(x.rows() * y.rows());
}

}  // namespace

double mmd(const Tensor2& a, const Tensor2& b, MmdKernel kernel) {
  if (a.cols() != b.cols()) throw InvalidArgument("mmd: dimension mismatch");
  if (a.rows() == 0 || b.rows() == 0) throw InvalidArgument("mmd: empty sample");
  if (kernel == MmdKernel::Linear) {
    return (a.colwise().mean() - b.colwise().mean()).squaredNorm();
  }
  const double sigma = median_pairwise_distance(a, b);
  const double gamma = 1.0 / (2.0 * sigma * sigma);
  const double v = (mean_kernel(a, a, gamma) + mean_kernel(b, b, gamma)) -
                   (mean_kernel(a, b, gamma) + mean_kernel(b, a, gamma));
  return std::max(0.0, v);
}

AutoEvalGModel autoeval_g_fit(std::span<const double> features, std::span<const double> labels,
                              MmdKernel kernel) {
  if (features.size() != labels.size() || features.size() < 2) {
    throw InvalidArgument("autoeval_g_fit: need two or more (feature, label) pairs");
  }
  const double n = static_cast<double>(features.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    mx += features[i];
    my += labels[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    sxx += (features[i] - mx) * (features[i] - mx);
    sxy += (features[i] - mx) * (labels[i] - my);
  }
  if (!(sxx > 0.0)) throw InvalidArgument("autoeval_g_fit: features have zero variance");
  AutoEvalGModel m;
  m.w1 = sxy / sxx;
  m.w0 = my - m.w1 * mx;
  m.kernel = kernel;
  if (!std::isfinite(m.w1) || !std::isfinite(m.w0)) throw NumericError("autoeval_g_fit: non-finite fit");
  return m;
}

double autoeval_g_raw(const AutoEvalGModel& m, double feature) { return m.w1 * feature + m.w0; }

double autoeval_g_estimate(const AutoEvalGModel& m, double feature) {
  return std::clamp(autoeval_g_raw(m, feature), 0.0, 1.0);
}

}  // namespace gnneval
