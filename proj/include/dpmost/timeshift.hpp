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

#include <cstddef>
#include <vector>

#include "dpmost/em.hpp"
#include "dpmost/model.hpp"

namespace dpmost {

/// Per-subject translations onto the disease time axis.
///
/// `shifts` are re-centred to mean zero; `raw_shifts` are the per-subject
/// maximizers before re-centring, and `recentre_offset` is their mean. A
/// model fitted under the old shifts stays equivalent under `shifts` after
/// translate_midpoints(state, recentre_offset).
struct ShiftEstimate {
  std::vector<double> shifts;
  std::vector<double> raw_shifts;
  double recentre_offset = 0.0;
  double lo = -10.0;
  double hi = 10.0;
  double grid_step = 0.1;
};

/// Grid maximization of each subject's mixture log-likelihood over its shift.
/// The subject's current shift is always a candidate; ties go to the
/// smaller |shift|. Throws std::invalid_argument when lo >= hi or step <= 0.
ShiftEstimate estimate_time_shifts(const CohortData& data, const ModelState& state,
                                   const Hyperparameters& hyper, double lo, double hi,
                                   double grid_step);

// Moves every sigmoid midpoint by -offset (the gauge partner of shifting all
// subjects by -offset).
ModelState translate_midpoints(const ModelState& state, double offset);

CohortData with_shifts(CohortData data, std::vector<double> shifts);

/// Shifts that align every subject to one sigmoid per biomarker.
///
/// Alternates a single-curve least-squares fit with estimate_time_shifts
/// until the shifts stop changing or `max_iterations` passes are done. Used to
/// seed alternate_fit: a mixture fitted to unaligned data tends to explain
/// the stagger with a spurious sub-trajectory split.
ShiftEstimate align_to_shared(const CohortData& data, const Hyperparameters& hyper, double lo,
                              double hi, double grid_step, int max_iterations);

struct AlternatingFit {
  FittedModel model;  // objective_trace spans every round and shift step
  ShiftEstimate shifts;
};

inline constexpr int kDefaultAlignIterations = 50;

/// Alternates MAP fitting and shift estimation for `outer_rounds` rounds.
///
/// Runs once from the data's shifts and, unless `align_iterations` is 0, once
/// more from align_to_shared shifts; the run with the higher final objective
/// is returned. Rounds after the first warm-start from the previous state, so
/// the returned objective trace is non-decreasing.
AlternatingFit alternate_fit(const CohortData& data, const Hyperparameters& hyper,
                             const FitConfig& config, int outer_rounds, double lo, double hi,
                             double grid_step, int align_iterations = kDefaultAlignIterations);

}  // namespace dpmost
