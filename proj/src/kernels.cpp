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

#include "dpmost/kernels.hpp"

#include <stdexcept>
#include <string>

namespace dpmost::kernels {
namespace {

void check_shapes(const UnitIndex& index, const ModelState& state, std::size_t out_size) {
  if (state.n_biomarkers() != index.n_biomarkers() || state.shared.size() != index.n_biomarkers() ||
      state.sub1.size() != index.n_biomarkers() || state.sub2.size() != index.n_biomarkers() ||
      state.xi.size() != index.n_biomarkers() || state.n_subjects() != index.n_subjects)
    throw std::invalid_argument("model state dimensions do not match the cohort");
  if (out_size != index.n_biomarkers() * index.n_units())
    throw std::invalid_argument("output buffer has " + std::to_string(out_size) +
                                " slots, expected " +
                                std::to_string(index.n_biomarkers() * index.n_units()));
}

inline double unit_loglik(const BiomarkerObservations& obs, std::size_t u,
                          const SigmoidParams& params, double log_sigma, double inv_sigma) {
  double total = 0.0;
  for (std::size_t i = obs.offsets[u]; i < obs.offsets[u + 1]; ++i) {
    const double z = (obs.x[i] - sigmoid_eval(params, obs.t[i])) * inv_sigma;
    total += -kHalfLogTwoPi - log_sigma - 0.5 * z * z;
  }
  return total;
}

inline std::array<double, 3> components_of(const UnitIndex& index, const ModelState& state,
                                           std::size_t b, std::size_t u) {
  const auto& obs = index.biomarkers[b];
  const double log_sigma = std::log(state.sigma[b]);
  const double inv_sigma = 1.0 / state.sigma[b];
  return {unit_loglik(obs, u, state.shared[b], log_sigma, inv_sigma),
          unit_loglik(obs, u, state.sub1[b], log_sigma, inv_sigma),
          unit_loglik(obs, u, state.sub2[b], log_sigma, inv_sigma)};
}

inline std::array<double, 3> weighted(const UnitIndex& index, const ModelState& state,
                                      std::size_t b, std::size_t u) {
  auto c = components_of(index, state, b, u);
  const auto w = log_component_weights(state.xi[b], state.pi[index.unit_subject[u]]);
  for (std::size_t k = 0; k < 3; ++k) c[k] = w[k] == kNegInf ? kNegInf : c[k] + w[k];
  return c;
}

}  // namespace

void unit_series_logliks(const BiomarkerObservations& obs, const SigmoidParams& params,
                         double sigma, std::span<double> out) {
  if (out.size() != obs.n_units()) throw std::invalid_argument("output buffer size mismatch");
  const double log_sigma = std::log(sigma);
  const double inv_sigma = 1.0 / sigma;
  const auto n = static_cast<std::ptrdiff_t>(obs.n_units());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t u = 0; u < n; ++u)
    out[u] = unit_loglik(obs, static_cast<std::size_t>(u), params, log_sigma, inv_sigma);
}

void unit_component_logliks(const UnitIndex& index, const ModelState& state,
                            std::span<std::array<double, 3>> out) {
  check_shapes(index, state, out.size());
  const std::size_t n_units = index.n_units();
  const auto n = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t slot = 0; slot < n; ++slot) {
    const auto s = static_cast<std::size_t>(slot);
    out[s] = components_of(index, state, s / n_units, s % n_units);
  }
}

void unit_mixture_logliks(const UnitIndex& index, const ModelState& state,
                          std::span<double> out) {
  check_shapes(index, state, out.size());
  const std::size_t n_units = index.n_units();
  const auto n = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t slot = 0; slot < n; ++slot) {
    const auto s = static_cast<std::size_t>(slot);
    const std::size_t b = s / n_units;
    const std::size_t u = s % n_units;
    out[s] = index.biomarkers[b].unit_has_data(u) ? log_sum_exp(weighted(index, state, b, u)) : 0.0;
  }
}

void unit_responsibilities(const UnitIndex& index, const ModelState& state,
                           std::span<std::array<double, 3>> out) {
  check_shapes(index, state, out.size());
  const std::size_t n_units = index.n_units();
  const auto n = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t slot = 0; slot < n; ++slot) {
    const auto s = static_cast<std::size_t>(slot);
    const std::size_t b = s / n_units;
    const std::size_t u = s % n_units;
    std::array<double, 3> logw = index.biomarkers[b].unit_has_data(u)
                                     ? weighted(index, state, b, u)
                                     : log_component_weights(state.xi[b], state.pi[index.unit_subject[u]]);
    const double norm = log_sum_exp(logw);
    for (double& v : logw) v = v == kNegInf ? 0.0 : std::exp(v - norm);
    out[s] = logw;
  }
}

void weighted_squared_residuals(const UnitIndex& index, const ModelState& state,
                                std::span<const std::array<double, 3>> gamma,
                                std::span<double> out) {
  check_shapes(index, state, gamma.size());
  if (out.size() != index.n_biomarkers()) throw std::invalid_argument("output buffer size mismatch");
  const std::size_t n_units = index.n_units();
  const auto n_b = static_cast<std::ptrdiff_t>(index.n_biomarkers());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t bi = 0; bi < n_b; ++bi) {
    const auto b = static_cast<std::size_t>(bi);
    const auto& obs = index.biomarkers[b];
    double total = 0.0;
    for (std::size_t u = 0; u < n_units; ++u) {
      const auto& g = gamma[b * n_units + u];
      std::array<double, 3> part{};
      for (std::size_t k = 0; k < 3; ++k) {
        if (g[k] == 0.0) continue;
        const auto& p = state.curve(b, k);
        double ssr = 0.0;
        for (std::size_t i = obs.offsets[u]; i < obs.offsets[u + 1]; ++i) {
          const double r = obs.x[i] - sigmoid_eval(p, obs.t[i]);
          ssr += r * r;
        }
        part[k] = g[k] * ssr;
      }
      total += part[0] + (part[1] + part[2]);
    }
    out[b] = total;
  }
}

}  // namespace dpmost::kernels
