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

#include "gnneval/optim.hpp"

#include <cmath>

#include "gnneval/error.hpp"

namespace gnneval {

void adam_step(ParamStore& params, const GradMap& grads, double lr, double wd,
               const AdamOptions& opts) {
  for (const auto& [name, g] : grads) {
    if (!g.allFinite()) throw NumericError("adam_step: non-finite gradient for '" + name + "'");
  }
  for (const auto& [name, g] : grads) {
    Param& p = params.at(name);
    if (g.rows() != p.value.rows() || g.cols() != p.value.cols()) {
      throw InvalidArgument("adam_step: gradient shape mismatch for '" + name + "'");
    }
    p.step += 1;
    const double c1 = 1.0 - std::pow(opts.beta1, static_cast<double>(p.step));
    const double c2 = 1.0 - std::pow(opts.beta2, static_cast<double>(p.step));
    p.m = opts.beta1 * p.m + (1.0 - opts.beta1) * g;
    p.v = opts.beta2 * p.v + (1.0 - opts.beta2) * g.cwiseProduct(g);
    if (wd != 0.0) p.value -= (lr * wd) * p.value;
    p.value.array() -= lr * (p.m.array() / c1) / ((p.v.array() / c2).sqrt() + opts.eps);
    if (!p.value.allFinite()) throw NumericError("adam_step: non-finite update for '" + name + "'");
  }
}

}  // namespace gnneval
