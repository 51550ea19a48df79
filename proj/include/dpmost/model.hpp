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
#include <span>
#include <string_view>
#include <vector>

#include "dpmost/cohort.hpp"
#include "dpmost/sigmoid.hpp"

namespace dpmost {

enum class Granularity {
  kSubject,      // one mixture unit per (subject, biomarker) series
  kObservation,  // one mixture unit per (visit, biomarker) measurement
};

std::string_view to_string(Granularity g) noexcept;
Granularity granularity_from_string(std::string_view s);

struct Hyperparameters {
  double beta = 15.0;        // strength of the prior favouring the shared trajectory
  double beta_noise = 15.0;  // Inv-Gamma(beta_noise - 1, beta_noise) prior on sigma
  Granularity granularity = Granularity::kSubject;

  void validate() const;

  // beta = beta_noise = 15% of the subject count.
  static Hyperparameters defaults_for(std::size_t n_subjects,
                                      Granularity g = Granularity::kSubject);

  friend bool operator==(const Hyperparameters&, const Hyperparameters&) = default;
};

// Component order inside the per-biomarker mixture.
enum Component : std::size_t { kShared = 0, kSub1 = 1, kSub2 = 2 };

/// Full parameter set of the two-level mixture.
///
/// `xi[b]` weights the shared (no split) trajectory of biomarker b, so the
/// split confidence is 1 - xi[b]. `pi[j]` is the probability that subject j
/// follows sub-trajectory 1 wherever a split exists.
struct ModelState {
  std::vector<SigmoidParams> shared;
  std::vector<SigmoidParams> sub1;
  std::vector<SigmoidParams> sub2;
  std::vector<double> sigma;
  std::vector<double> xi;
  std::vector<double> pi;

  std::size_t n_biomarkers() const noexcept { return sigma.size(); }
  std::size_t n_subjects() const noexcept { return pi.size(); }

  const SigmoidParams& curve(std::size_t b, std::size_t component) const;
  SigmoidParams& curve(std::size_t b, std::size_t component);

  double split_confidence(std::size_t b) const { return 1.0 - xi.at(b); }

  // Throws std::invalid_argument on any parameter outside its domain.
  void validate() const;
  // Throws std::invalid_argument when the dimensions disagree with `data`.
  void check_dimensions(const CohortData& data) const;

  // sub1 <-> sub2 and pi -> 1 - pi; leaves the posterior unchanged.
  ModelState label_swapped() const;

  friend bool operator==(const ModelState&, const ModelState&) = default;
};

/// Flattened, shift-applied observations of one biomarker, grouped by unit.
///
/// Observations of unit u occupy [offsets[u], offsets[u+1]).
struct BiomarkerObservations {
  std::vector<double> t;
  std::vector<double> x;
  std::vector<std::size_t> offsets;

  std::size_t n_units() const noexcept { return offsets.empty() ? 0 : offsets.size() - 1; }
  std::size_t size() const noexcept { return t.size(); }
  bool unit_has_data(std::size_t u) const noexcept { return offsets[u + 1] > offsets[u]; }
};

/// Mixture units of a cohort under a granularity, shared by all biomarkers.
struct UnitIndex {
  Granularity granularity = Granularity::kSubject;
  std::size_t n_subjects = 0;
  std::vector<std::size_t> unit_subject;
  std::vector<BiomarkerObservations> biomarkers;

  std::size_t n_units() const noexcept { return unit_subject.size(); }
  std::size_t n_biomarkers() const noexcept { return biomarkers.size(); }
};

UnitIndex build_unit_index(const CohortData& data, Granularity granularity);

/// Sum of Gaussian log-densities of `values` around f(times|params).
/// Missing values are skipped; `shift` is added to every time.
double series_loglik(std::span<const double> times,
                     std::span<const std::optional<double>> values,
                     const SigmoidParams& params, double sigma, double shift = 0.0);

double log_likelihood(const CohortData& data, const ModelState& state,
                      const Hyperparameters& hyper);
double log_likelihood(const UnitIndex& index, const ModelState& state);

// Log-likelihood plus beta * sum(xi) - beta_noise * sum(ln sigma + 1/sigma).
double log_posterior(const CohortData& data, const ModelState& state,
                     const Hyperparameters& hyper);
double log_posterior(const UnitIndex& index, const ModelState& state,
                     const Hyperparameters& hyper);

double log_prior(const ModelState& state, const Hyperparameters& hyper);

}  // namespace dpmost
