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

// Data-parallel inner loops of the mixture model. Every kernel writes one
// output slot per (biomarker, unit) so results do not depend on the thread
// schedule; reductions over slots are done serially by the callers.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>

#include "dpmost/model.hpp"

namespace dpmost::kernels {

inline constexpr double kHalfLogTwoPi = 0.91893853320467274178;
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double log_normal(double x, double mean, double sigma) noexcept {
  const double z = (x - mean) / sigma;
  return -kHalfLogTwoPi - std::log(sigma) - 0.5 * z * z;
}

inline double safe_log(double p) noexcept { return p > 0.0 ? std::log(p) : kNegInf; }

inline double log_sum_exp(const std::array<double, 3>& v) noexcept {
  const double m = std::max({v[0], v[1], v[2]});
  if (m == kNegInf) return kNegInf;
  // Sub-components are summed first so exchanging them is bitwise neutral.
  return m + std::log(std::exp(v[0] - m) + (std::exp(v[1] - m) + std::exp(v[2] - m)));
}

// Log prior weight of each component: (xi, (1-xi) pi, (1-xi)(1-pi)).
inline std::array<double, 3> log_component_weights(double xi, double pi) noexcept {
  const double log_split = safe_log(1.0 - xi);
  return {safe_log(xi), log_split + safe_log(pi), log_split + safe_log(1.0 - pi)};
}

// out[u] = sum over the unit's observations of log N(x; f(t|params), sigma).
void unit_series_logliks(const BiomarkerObservations& obs, const SigmoidParams& params,
                         double sigma, std::span<double> out);

// out[b * n_units + u] = (log L under shared, sub1, sub2) for every unit.
void unit_component_logliks(const UnitIndex& index, const ModelState& state,
                            std::span<std::array<double, 3>> out);

// out[b * n_units + u] = log of the unit's mixture density (0 for empty units).
void unit_mixture_logliks(const UnitIndex& index, const ModelState& state,
                          std::span<double> out);

// out[b * n_units + u] = normalized posterior component weights. Empty units
// receive the prior weights.
void unit_responsibilities(const UnitIndex& index, const ModelState& state,
                           std::span<std::array<double, 3>> out);

// Per-biomarker sum over units and components of gamma * squared residual.
void weighted_squared_residuals(const UnitIndex& index, const ModelState& state,
                                std::span<const std::array<double, 3>> gamma,
                                std::span<double> out);

}  // namespace dpmost::kernels
