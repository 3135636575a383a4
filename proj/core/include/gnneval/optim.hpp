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

#include "gnneval/tape.hpp"

namespace gnneval {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One Adam update with decoupled weight decay, in place.
///
/// For every parameter with an entry in `grads`:
///   p <- p - lr * wd * p
///   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2,  step += 1
///   p <- p - lr * m_hat / (sqrt(v_hat) + eps)
/// with bias-corrected m_hat, v_hat. Throws NumericError on a non-finite
/// gradient or update.
void adam_step(ParamStore& params, const GradMap& grads, double lr, double wd,
               const AdamOptions& opts = {});

}  // namespace gnneval
