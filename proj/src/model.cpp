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

#include "dpmost/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "dpmost/kernels.hpp"

namespace dpmost {

std::string_view to_string(Granularity g) noexcept {
  return g == Granularity::kSubject ? "subject" : "observation";
}

Granularity granularity_from_string(std::string_view s) {
  if (s == "subject") return Granularity::kSubject;
  if (s == "observation") return Granularity::kObservation;
  throw std::invalid_argument("unknown granularity '" + std::string(s) + "'");
}

void Hyperparameters::validate() const {
  if (!(beta >= 0.0) || !std::isfinite(beta))
    throw std::invalid_argument("beta must be a finite non-negative number");
  if (!(beta_noise > 1.0) || !std::isfinite(beta_noise))
    throw std::invalid_argument("beta_noise must be finite and > 1");
}

Hyperparameters Hyperparameters::defaults_for(std::size_t n_subjects, Granularity g) {
  const double v = 0.15 * static_cast<double>(n_subjects);
  // Small cohorts would otherwise break beta_noise > 1.
  return {v, std::max(v, 1.5), g};
}

const SigmoidParams& ModelState::curve(std::size_t b, std::size_t component) const {
  switch (component) {
    case kShared: return shared.at(b);
    case kSub1: return sub1.at(b);
    case kSub2: return sub2.at(b);
  }
  throw std::out_of_range("component index");
}

SigmoidParams& ModelState::curve(std::size_t b, std::size_t component) {
  return const_cast<SigmoidParams&>(std::as_const(*this).curve(b, component));
}

void ModelState::validate() const {
  const std::size_t n_b = sigma.size();
  if (shared.size() != n_b || sub1.size() != n_b || sub2.size() != n_b || xi.size() != n_b)
    throw std::invalid_argument("model state has inconsistent biomarker counts");
  for (std::size_t b = 0; b < n_b; ++b) {
    if (!shared[b].valid() || !sub1[b].valid() || !sub2[b].valid())
      throw std::invalid_argument("sigmoid of biomarker " + std::to_string(b) +
                                  " needs supremum > 0 and growth_rate > 0");
    if (!(sigma[b] > 0.0) || !std::isfinite(sigma[b]))
      throw std::invalid_argument("sigma of biomarker " + std::to_string(b) + " must be > 0");
    if (!(xi[b] >= 0.0 && xi[b] <= 1.0))
      throw std::invalid_argument("xi of biomarker " + std::to_string(b) + " outside [0,1]");
  }
  for (std::size_t j = 0; j < pi.size(); ++j)
    if (!(pi[j] >= 0.0 && pi[j] <= 1.0))
      throw std::invalid_argument("pi of subject " + std::to_string(j) + " outside [0,1]");
}

void ModelState::check_dimensions(const CohortData& data) const {
  if (n_biomarkers() != data.n_biomarkers() || shared.size() != data.n_biomarkers() ||
      sub1.size() != data.n_biomarkers() || sub2.size() != data.n_biomarkers() ||
      xi.size() != data.n_biomarkers())
    throw std::invalid_argument("model has " + std::to_string(n_biomarkers()) +
                                " biomarkers, cohort has " +
                                std::to_string(data.n_biomarkers()));
  if (n_subjects() != data.n_subjects())
    throw std::invalid_argument("model has " + std::to_string(n_subjects()) +
                                " subjects, cohort has " + std::to_string(data.n_subjects()));
}

ModelState ModelState::label_swapped() const {
  ModelState s = *this;
  std::swap(s.sub1, s.sub2);
  for (double& p : s.pi) p = 1.0 - p;
  return s;
}

UnitIndex build_unit_index(const CohortData& data, Granularity granularity) {
  data.validate();
  UnitIndex index;
  index.granularity = granularity;
  index.n_subjects = data.n_subjects();
  for (std::size_t j = 0; j < data.n_subjects(); ++j) {
    const auto& s = data.subjects[j];
    if (granularity == Granularity::kSubject) {
      index.unit_subject.push_back(j);
    } else {
      index.unit_subject.insert(index.unit_subject.end(), s.times.size(), j);
    }
  }
  index.biomarkers.resize(data.n_biomarkers());
  for (std::size_t b = 0; b < data.n_biomarkers(); ++b) {
    auto& obs = index.biomarkers[b];
    obs.offsets.reserve(index.n_units() + 1);
    obs.offsets.push_back(0);
    for (std::size_t j = 0; j < data.n_subjects(); ++j) {
      const auto& s = data.subjects[j];
      const double shift = data.shift(j);
      for (std::size_t l = 0; l < s.times.size(); ++l) {
        if (const auto& v = s.values[b][l]) {
          obs.t.push_back(s.times[l] + shift);
          obs.x.push_back(*v);
        }
        if (granularity == Granularity::kObservation) obs.offsets.push_back(obs.t.size());
      }
      if (granularity == Granularity::kSubject) obs.offsets.push_back(obs.t.size());
    }
  }
  return index;
}

double series_loglik(std::span<const double> times,
                     std::span<const std::optional<double>> values,
                     const SigmoidParams& params, double sigma, double shift) {
  double total = 0.0;
  for (std::size_t l = 0; l < times.size() && l < values.size(); ++l)
    if (values[l]) total += kernels::log_normal(*values[l], sigmoid_eval(params, times[l] + shift), sigma);
  return total;
}

double log_likelihood(const UnitIndex& index, const ModelState& state) {
  std::vector<double> per_unit(index.n_biomarkers() * index.n_units());
  kernels::unit_mixture_logliks(index, state, per_unit);
  double total = 0.0;
  for (double v : per_unit) total += v;
  return total;
}

double log_likelihood(const CohortData& data, const ModelState& state,
                      const Hyperparameters& hyper) {
  state.check_dimensions(data);
  return log_likelihood(build_unit_index(data, hyper.granularity), state);
}

double log_prior(const ModelState& state, const Hyperparameters& hyper) {
  double xi_sum = 0.0;
  double sigma_penalty = 0.0;
  for (std::size_t b = 0; b < state.n_biomarkers(); ++b) {
    xi_sum += state.xi[b];
    sigma_penalty += std::log(state.sigma[b]) + 1.0 / state.sigma[b];
  }
  return hyper.beta * xi_sum - hyper.beta_noise * sigma_penalty;
}

double log_posterior(const UnitIndex& index, const ModelState& state,
                     const Hyperparameters& hyper) {
  return log_likelihood(index, state) + log_prior(state, hyper);
}

double log_posterior(const CohortData& data, const ModelState& state,
                     const Hyperparameters& hyper) {
  return log_likelihood(data, state, hyper) + log_prior(state, hyper);
}

}  // namespace dpmost
