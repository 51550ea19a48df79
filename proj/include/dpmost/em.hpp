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

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dpmost/model.hpp"

namespace dpmost {

/// E-step posterior over {shared, sub1, sub2} for every (biomarker, unit).
struct ResponsibilityTensor {
  std::size_t n_biomarkers = 0;
  std::size_t n_units = 0;
  std::vector<std::array<double, 3>> gamma;  // row-major: b * n_units + u
  std::vector<std::uint8_t> has_data;        // same layout
  std::vector<std::size_t> unit_subject;

  const std::array<double, 3>& at(std::size_t b, std::size_t u) const {
    return gamma[b * n_units + u];
  }
  bool unit_has_data(std::size_t b, std::size_t u) const { return has_data[b * n_units + u] != 0; }
};

struct FitConfig {
  int max_iterations = 500;
  double tolerance = 1e-6;
  int restarts = 1;
  std::uint64_t rng_seed = 0;
  std::optional<ModelState> init_overrides;

  void validate() const;
};

struct FittedModel {
  ModelState state;
  std::vector<double> objective_trace;
  bool converged = false;
  int restart_index = 0;

  int iterations() const noexcept {
    return objective_trace.empty() ? 0 : static_cast<int>(objective_trace.size()) - 1;
  }
  double objective() const { return objective_trace.back(); }

  friend bool operator==(const FittedModel&, const FittedModel&) = default;
};

ResponsibilityTensor e_step(const CohortData& data, const ModelState& state,
                            const Hyperparameters& hyper);
ResponsibilityTensor e_step(const UnitIndex& index, const ModelState& state);

// argmax over [0,1] of A ln(xi) + B ln(1-xi) + beta xi.
double m_step_xi(double shared_mass, double split_mass, double beta);

// sum1 / (sum1 + sum2), or `fallback` when both are zero.
double m_step_pi(double sum1, double sum2, double fallback);

// argmax over sigma > 0 of -(N + beta_noise) ln sigma - S / (2 sigma^2) - beta_noise / sigma.
double m_step_sigma(double weighted_ssr, double weighted_count, double beta_noise);

struct ThetaStepOptions {
  int max_iterations = 200;
  double gradient_tolerance = 1e-8;
};

/// Weighted least-squares refit of one sigmoid.
///
/// Minimizes sum_u weights[u] * sum_{l in u} (x_l - f(t_l))^2 by damped
/// Gauss-Newton (Levenberg-Marquardt) on (ln supremum, ln growth_rate,
/// midpoint). The returned objective never exceeds the one at `init`.
/// Throws std::invalid_argument if no unit with data has positive weight.
SigmoidParams m_step_theta(const BiomarkerObservations& obs, std::span<const double> weights,
                           const SigmoidParams& init, double sigma,
                           const ThetaStepOptions& options = {});

// Objective minimized by m_step_theta.
double weighted_sse(const BiomarkerObservations& obs, std::span<const double> weights,
                    const SigmoidParams& params);

// Randomized starting point: xi = pi = 0.5, sigma = per-biomarker data std,
// sigmoid parameters drawn around the data envelope.
ModelState initial_state(const UnitIndex& index, std::uint64_t seed);

/// Runs EM from a given state until convergence; one entry per iteration in
/// the objective trace (entry 0 is the starting objective).
FittedModel run_em(const UnitIndex& index, const Hyperparameters& hyper, ModelState start,
                   const FitConfig& config);

/// Multi-restart MAP fit; returns the restart with the highest final objective.
FittedModel fit(const CohortData& data, const Hyperparameters& hyper, const FitConfig& config);

}  // namespace dpmost
