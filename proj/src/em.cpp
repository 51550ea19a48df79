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

#include "dpmost/em.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <random>
#include <stdexcept>
#include <string>

#include "dpmost/error.hpp"
#include "dpmost/kernels.hpp"
#include "dpmost/rng.hpp"

namespace dpmost {
namespace {

// Components whose total responsibility falls below this keep their curve.
constexpr double kMinComponentWeight = 1e-9;

// Box on the transformed sigmoid coordinates; keeps exp() finite.
constexpr double kLogSupremumMin = -30.0, kLogSupremumMax = 30.0;
constexpr double kLogRateMin = -20.0, kLogRateMax = 10.0;

using Vec3 = std::array<double, 3>;

Vec3 to_coords(const SigmoidParams& p) {
  return {std::log(p.supremum), std::log(p.growth_rate), p.midpoint};
}

SigmoidParams from_coords(const Vec3& c) {
  return {std::exp(std::clamp(c[0], kLogSupremumMin, kLogSupremumMax)),
          std::exp(std::clamp(c[1], kLogRateMin, kLogRateMax)), c[2]};
}

// Solves (H + lambda D) x = g by Cholesky; false if not positive definite.
bool solve_damped(const std::array<double, 9>& h, const Vec3& g, double lambda, Vec3& x) {
  const double max_diag = std::max({h[0], h[4], h[8]});
  std::array<double, 9> a = h;
  for (int i = 0; i < 3; ++i)
    a[4 * i] += lambda * std::max(h[4 * i], 1e-12 * max_diag + 1e-300);
  std::array<double, 9> l{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j <= i; ++j) {
      double sum = a[3 * i + j];
      for (int k = 0; k < j; ++k) sum -= l[3 * i + k] * l[3 * j + k];
      if (i == j) {
        if (!(sum > 0.0)) return false;
        l[3 * i + i] = std::sqrt(sum);
      } else {
        l[3 * i + j] = sum / l[3 * j + j];
      }
    }
  }
  Vec3 y{};
  for (int i = 0; i < 3; ++i) {
    double sum = g[i];
    for (int k = 0; k < i; ++k) sum -= l[3 * i + k] * y[k];
    y[i] = sum / l[3 * i + i];
  }
  for (int i = 2; i >= 0; --i) {
    double sum = y[i];
    for (int k = i + 1; k < 3; ++k) sum -= l[3 * k + i] * x[k];
    x[i] = sum / l[3 * i + i];
  }
  return std::isfinite(x[0]) && std::isfinite(x[1]) && std::isfinite(x[2]);
}

// Normal equations of the weighted residuals r = x - f in transformed coordinates.
void normal_equations(const BiomarkerObservations& obs, std::span<const double> weights,
                      const SigmoidParams& p, std::array<double, 9>& h, Vec3& g) {
  h.fill(0.0);
  g.fill(0.0);
  for (std::size_t u = 0; u < obs.n_units(); ++u) {
    const double w = weights[u];
    if (w <= 0.0) continue;
    for (std::size_t i = obs.offsets[u]; i < obs.offsets[u + 1]; ++i) {
      const double dt = obs.t[i] - p.midpoint;
      const double s = logistic(p.growth_rate * dt);
      const double f = p.supremum * s;
      const double slope = f * (1.0 - s);
      const Vec3 jac{f, slope * p.growth_rate * dt, -slope * p.growth_rate};
      const double r = obs.x[i] - f;
      for (int a = 0; a < 3; ++a) {
        g[a] += w * jac[a] * r;
        for (int b = 0; b <= a; ++b) h[3 * a + b] += w * jac[a] * jac[b];
      }
    }
  }
  h[1] = h[3];
  h[2] = h[6];
  h[5] = h[7];
}

std::uint64_t restart_seed(std::uint64_t seed, int restart) {
  return derive_seed(seed, static_cast<std::uint64_t>(restart));
}

double truncated_normal(std::mt19937_64& rng, double mean, double sd, double floor) {
  std::normal_distribution<double> dist(mean, sd);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const double v = dist(rng);
    if (v > floor) return v;
  }
  return std::max(mean, floor + sd);
}

}  // namespace

void FitConfig::validate() const {
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be > 0");
  if (restarts < 1) throw std::invalid_argument("restarts must be >= 1");
}

ResponsibilityTensor e_step(const UnitIndex& index, const ModelState& state) {
  ResponsibilityTensor r;
  r.n_biomarkers = index.n_biomarkers();
  r.n_units = index.n_units();
  r.unit_subject = index.unit_subject;
  r.gamma.resize(r.n_biomarkers * r.n_units);
  kernels::unit_responsibilities(index, state, r.gamma);
  r.has_data.resize(r.gamma.size());
  for (std::size_t b = 0; b < r.n_biomarkers; ++b)
    for (std::size_t u = 0; u < r.n_units; ++u)
      r.has_data[b * r.n_units + u] = index.biomarkers[b].unit_has_data(u);
  return r;
}

ResponsibilityTensor e_step(const CohortData& data, const ModelState& state,
                            const Hyperparameters& hyper) {
  state.check_dimensions(data);
  return e_step(build_unit_index(data, hyper.granularity), state);
}

double m_step_xi(double shared_mass, double split_mass, double beta) {
  const double a = shared_mass;
  const double b = split_mass;
  if (!(a >= 0.0 && b >= 0.0 && beta >= 0.0) || !std::isfinite(a + b + beta))
    throw std::invalid_argument("m_step_xi needs finite non-negative inputs");
  if (!(a + b > 0.0)) throw std::invalid_argument("m_step_xi needs A + B > 0");
  if (beta == 0.0) return a / (a + b);
  // Root in [0,1] of beta xi^2 + (A + B - beta) xi - A = 0, in the form that
  // avoids cancellation for either sign of the linear coefficient.
  const double q = a + b - beta;
  const double disc = std::sqrt(q * q + 4.0 * beta * a);
  double xi;
  if (q >= 0.0) {
    xi = q + disc > 0.0 ? 2.0 * a / (q + disc) : 0.0;
  } else {
    xi = (disc - q) / (2.0 * beta);
  }
  return std::clamp(xi, 0.0, 1.0);
}

double m_step_pi(double sum1, double sum2, double fallback) {
  const double total = sum1 + sum2;
  if (!(total > 0.0)) return fallback;
  // The smaller share is the exact complement of the larger one, so that
  // m_step_pi(b, a) == 1 - m_step_pi(a, b) holds bitwise.
  if (sum1 >= sum2) return std::clamp(sum1 / total, 0.0, 1.0);
  return 1.0 - std::clamp(sum2 / total, 0.0, 1.0);
}

double m_step_sigma(double weighted_ssr, double weighted_count, double beta_noise) {
  if (!(weighted_ssr >= 0.0) || !(weighted_count >= 0.0))
    throw std::invalid_argument("m_step_sigma needs S >= 0 and N >= 0");
  if (!(beta_noise > 0.0)) throw std::invalid_argument("m_step_sigma needs beta_noise > 0");
  const double n = weighted_count + beta_noise;
  return (beta_noise + std::sqrt(beta_noise * beta_noise + 4.0 * n * weighted_ssr)) / (2.0 * n);
}

double weighted_sse(const BiomarkerObservations& obs, std::span<const double> weights,
                    const SigmoidParams& params) {
  double total = 0.0;
  for (std::size_t u = 0; u < obs.n_units(); ++u) {
    const double w = weights[u];
    if (w <= 0.0) continue;
    double ssr = 0.0;
    for (std::size_t i = obs.offsets[u]; i < obs.offsets[u + 1]; ++i) {
      const double r = obs.x[i] - sigmoid_eval(params, obs.t[i]);
      ssr += r * r;
    }
    total += w * ssr;
  }
  return total;
}

SigmoidParams m_step_theta(const BiomarkerObservations& obs, std::span<const double> weights,
                           const SigmoidParams& init, double sigma,
                           const ThetaStepOptions& options) {
  if (weights.size() != obs.n_units())
    throw std::invalid_argument("m_step_theta: one weight per unit required");
  double weight_with_data = 0.0;
  for (std::size_t u = 0; u < obs.n_units(); ++u) {
    if (weights[u] < 0.0 || !std::isfinite(weights[u]))
      throw std::invalid_argument("m_step_theta: weights must be finite and >= 0");
    if (obs.unit_has_data(u)) weight_with_data += weights[u];
  }
  if (!(weight_with_data > 0.0)) throw std::invalid_argument("m_step_theta: all weights are zero");

  const double inv_var = 1.0 / (sigma * sigma);
  Vec3 coords = to_coords(init);
  SigmoidParams current = from_coords(coords);
  double sse = weighted_sse(obs, weights, current);
  const double init_sse = weighted_sse(obs, weights, init);
  if (!std::isfinite(sse)) return init;

  double lambda = 1e-3;
  std::array<double, 9> h;
  Vec3 g;
  for (int it = 0; it < options.max_iterations; ++it) {
    normal_equations(obs, weights, current, h, g);
    const double grad_norm = std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]) * inv_var;
    if (grad_norm < options.gradient_tolerance) break;

    bool accepted = false;
    while (lambda < 1e12) {
      Vec3 step{};
      if (solve_damped(h, g, lambda, step)) {
        const Vec3 trial_coords{coords[0] + step[0], coords[1] + step[1], coords[2] + step[2]};
        const SigmoidParams trial = from_coords(trial_coords);
        const double trial_sse = weighted_sse(obs, weights, trial);
        if (trial_sse < sse) {
          const double decrease = sse - trial_sse;
          coords = trial_coords;
          current = trial;
          sse = trial_sse;
          lambda = std::max(lambda / 3.0, 1e-12);
          accepted = true;
          if (decrease <= 1e-15 * sse) it = options.max_iterations;
          break;
        }
      }
      lambda *= 4.0;
    }
    if (!accepted) break;
  }
  // The clamp in from_coords can move the starting point; never return worse.
  if (!current.valid() || !(sse <= init_sse)) return init;
  return current;
}

ModelState initial_state(const UnitIndex& index, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::size_t n_b = index.n_biomarkers();
  ModelState s;
  s.shared.resize(n_b);
  s.sub1.resize(n_b);
  s.sub2.resize(n_b);
  s.sigma.resize(n_b);
  s.xi.assign(n_b, 0.5);
  s.pi.assign(index.n_subjects, 0.5);
  for (std::size_t b = 0; b < n_b; ++b) {
    const auto& obs = index.biomarkers[b];
    double range = 1.0, t_lo = 0.0, t_hi = 1.0, sd = 1.0;
    if (obs.size() > 0) {
      const auto [x_lo, x_hi] = std::minmax_element(obs.x.begin(), obs.x.end());
      const auto [tl, th] = std::minmax_element(obs.t.begin(), obs.t.end());
      range = *x_hi - *x_lo;
      if (!(range > 0.0)) range = std::max(std::abs(*x_hi), 1.0);
      t_lo = *tl;
      t_hi = *th;
      if (!(t_hi > t_lo)) {
        t_lo -= 0.5;
        t_hi += 0.5;
      }
      double mean = 0.0;
      for (double v : obs.x) mean += v;
      mean /= static_cast<double>(obs.size());
      double var = 0.0;
      for (double v : obs.x) var += (v - mean) * (v - mean);
      var /= static_cast<double>(obs.size());
      if (var > 0.0) sd = std::sqrt(var);
    }
    const double span = t_hi - t_lo;
    std::uniform_real_distribution<double> midpoint(t_lo, t_hi);
    for (std::size_t k = 0; k < 3; ++k) {
      auto& p = s.curve(b, k);
      p.supremum = truncated_normal(rng, range, range / 4.0, 0.0);
      p.growth_rate = truncated_normal(rng, 4.0 / span, 2.0 / span, 0.0);
      p.midpoint = midpoint(rng);
    }
    s.sigma[b] = sd;
  }
  return s;
}

FittedModel run_em(const UnitIndex& index, const Hyperparameters& hyper, ModelState start,
                   const FitConfig& config) {
  start.validate();
  const std::size_t n_b = index.n_biomarkers();
  const std::size_t n_units = index.n_units();
  if (start.n_biomarkers() != n_b || start.n_subjects() != index.n_subjects)
    throw std::invalid_argument("starting state does not match the cohort");

  FittedModel out;
  out.state = std::move(start);
  ModelState& s = out.state;
  double objective = log_posterior(index, s, hyper);
  if (!std::isfinite(objective)) throw FitError("non-finite objective at the starting point");
  out.objective_trace.push_back(objective);

  std::vector<std::array<double, 3>> gamma(n_b * n_units);
  std::vector<double> ssr(n_b);
  std::vector<double> sum1(index.n_subjects), sum2(index.n_subjects);
  for (int it = 0; it < config.max_iterations; ++it) {
    kernels::unit_responsibilities(index, s, gamma);

    const auto n_tasks = static_cast<std::ptrdiff_t>(3 * n_b);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t task = 0; task < n_tasks; ++task) {
      const auto b = static_cast<std::size_t>(task) / 3;
      const auto k = static_cast<std::size_t>(task) % 3;
      const auto& obs = index.biomarkers[b];
      std::vector<double> w(n_units, 0.0);
      double total = 0.0;
      for (std::size_t u = 0; u < n_units; ++u) {
        if (!obs.unit_has_data(u)) continue;
        w[u] = gamma[b * n_units + u][k];
        total += w[u];
      }
      if (total > kMinComponentWeight) s.curve(b, k) = m_step_theta(obs, w, s.curve(b, k), s.sigma[b]);
    }

    kernels::weighted_squared_residuals(index, s, gamma, ssr);
    for (std::size_t b = 0; b < n_b; ++b) {
      const auto& obs = index.biomarkers[b];
      double count = 0.0, shared_mass = 0.0, split_mass = 0.0;
      for (std::size_t u = 0; u < n_units; ++u) {
        if (!obs.unit_has_data(u)) continue;
        const auto& g = gamma[b * n_units + u];
        count += (g[0] + (g[1] + g[2])) * static_cast<double>(obs.offsets[u + 1] - obs.offsets[u]);
        shared_mass += g[0];
        split_mass += g[1] + g[2];
      }
      s.sigma[b] = m_step_sigma(ssr[b], count, hyper.beta_noise);
      if (shared_mass + split_mass > 0.0) s.xi[b] = m_step_xi(shared_mass, split_mass, hyper.beta);
    }

    std::fill(sum1.begin(), sum1.end(), 0.0);
    std::fill(sum2.begin(), sum2.end(), 0.0);
    for (std::size_t b = 0; b < n_b; ++b) {
      for (std::size_t u = 0; u < n_units; ++u) {
        if (!index.biomarkers[b].unit_has_data(u)) continue;
        const auto& g = gamma[b * n_units + u];
        sum1[index.unit_subject[u]] += g[1];
        sum2[index.unit_subject[u]] += g[2];
      }
    }
    for (std::size_t j = 0; j < index.n_subjects; ++j) s.pi[j] = m_step_pi(sum1[j], sum2[j], s.pi[j]);

    const double previous = objective;
    objective = log_posterior(index, s, hyper);
    if (!std::isfinite(objective))
      throw FitError("objective became non-finite at iteration " + std::to_string(it + 1));
    out.objective_trace.push_back(objective);
    if (std::abs(objective - previous) <= config.tolerance * std::max(std::abs(previous), 1e-300)) {
      out.converged = true;
      break;
    }
  }
  return out;
}

FittedModel fit(const CohortData& data, const Hyperparameters& hyper, const FitConfig& config) {
  if (data.n_subjects() == 0) throw DataError("cohort is empty");
  if (data.n_subjects() < 2) throw DataError("fitting needs at least two subjects");
  hyper.validate();
  config.validate();
  const UnitIndex index = build_unit_index(data, hyper.granularity);
  if (config.init_overrides) config.init_overrides->check_dimensions(data);

  std::vector<FittedModel> runs(static_cast<std::size_t>(config.restarts));
  std::vector<std::exception_ptr> errors(runs.size());
#pragma omp parallel for schedule(dynamic)
  for (int r = 0; r < config.restarts; ++r) {
    try {
      ModelState start = (r == 0 && config.init_overrides)
                             ? *config.init_overrides
                             : initial_state(index, restart_seed(config.rng_seed, r));
      runs[r] = run_em(index, hyper, std::move(start), config);
      runs[r].restart_index = r;
    } catch (...) {
      errors[r] = std::current_exception();
    }
  }

  int best = -1;
  for (int r = 0; r < config.restarts; ++r) {
    if (errors[r]) continue;
    if (best < 0 || runs[r].objective() > runs[best].objective()) best = r;
  }
  if (best < 0) std::rethrow_exception(errors.front());
  return std::move(runs[best]);
}

}  // namespace dpmost
