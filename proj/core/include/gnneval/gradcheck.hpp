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

#include <functional>

#include "gnneval/tape.hpp"

namespace gnneval {

/// Builds a forward pass on the given tape and returns its 1x1 loss.
using LossBuilder = std::function<Var(Tape&)>;

/// Central-difference check of the tape gradient of `loss` w.r.t. every
/// scalar of `params`. Returns max |a - n| / max(1, |a|, |n|).
double grad_check(const LossBuilder& loss, const ParamStore& params, double h = 1e-4);

}  // namespace gnneval
