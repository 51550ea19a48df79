// Copyright 2026 The dpmost Authors. All Rights Reserved.
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

// Serial direct-space implementations kept as oracles for the parallel
// log-space kernels. They walk the cohort structure directly instead of the
// flattened UnitIndex and multiply densities instead of adding logs, so they
// underflow on long series and are only meant for well-scaled test inputs.

#include "dpmost/em.hpp"
#include "dpmost/model.hpp"

namespace dpmost::reference {

double log_likelihood(const CohortData& data, const ModelState& state,
                      const Hyperparameters& hyper);

ResponsibilityTensor e_step(const CohortData& data, const ModelState& state,
                            const Hyperparameters& hyper);

}  // namespace dpmost::reference
