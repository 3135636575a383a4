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

#include "gnneval/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "gnneval/error.hpp"

namespace gnneval {

double grad_check(const LossBuilder& loss, const ParamStore& params, double h) {
  if (!(h > 0)) throw InvalidArgument("grad_check: h must be positive");
  GradMap analytic;
  {
    Tape tape(params);
    analytic = tape.backward(loss(tape));
  }
  ParamStore probe = params;
  auto eval = [&] {
    Tape tape(probe);
    return tape.scalar(loss(tape));
  };
  double worst = 0.0;
  for (auto& [name, p] : probe.entries()) {
    const Tensor2& a = analytic.at(name);
    for (Eigen::Index k = 0; k < p.value.size(); ++k) {
      const double orig = p.value.data()[k];
      p.value.data()[k] = orig + h;
      const double up = eval();
      p.value.data()[k] = orig - h;
      const double down = eval();
      p.value.data()[k] = orig;
      const double numeric = (up - down) / (2.0 * h);
      const double an = a.data()[k];
      const double denom = std::max({1.0, std::abs(an), std::abs(numeric)});
      worst = std::max(worst, std::abs(an - numeric) / denom);
    }
  }
  return worst;
}

}  // namespace gnneval
