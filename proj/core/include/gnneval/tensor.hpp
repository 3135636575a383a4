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

#include <cmath>
#include <cstddef>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "gnneval/rng.hpp"

namespace gnneval {

/// Dense row-major matrix of doubles. Node-feature and embedding matrices are N x d.
using Tensor2 = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Sparse row-major propagation matrix (normalized adjacency and friends).
using SparseAdj = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

inline bool all_finite(const Tensor2& t) { return t.allFinite(); }

/// Glorot/Xavier uniform init: U(-a, a), a = sqrt(6 / (fan_in + fan_out)).
inline Tensor2 glorot_uniform(Eigen::Index fan_in, Eigen::Index fan_out, Rng& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor2 w(fan_in, fan_out);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-a, a);
  return w;
}

}  // namespace gnneval
