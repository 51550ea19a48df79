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

#include "dpmost/timeshift.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dpmost/em.hpp"
#include "dpmost/kernels.hpp"

namespace dpmost {
namespace {

// Mixture log-likelihood of subject j with its visit times moved by `shift`.
double subject_loglik(const SubjectSeries& s, const ModelState& state, std::size_t j,
                      Granularity granularity, double shift) {
  double total = 0.0;
  const double pi = state.pi[j];
  for (std::size_t b = 0; b < state.n_biomarkers(); ++b) {
    const auto logw = kernels::log_component_weights(state.xi[b], pi);
    const double sigma = state.sigma[b];
    auto mix = [&](std::size_t first, std::size_t last) {
      std::array<double, 3> c{0.0, 0.0, 0.0};
      bool any = false;
      for (std::size_t l = first; l < last; ++l) {
        const auto& v = s.values[b][l];
        if (!v) continue;
        any = true;
        const double t = s.times[l] + shift;
        for (std::size_t k = 0; k < 3; ++k)
          c[k] += kernels::log_normal(*v, sigmoid_eval(state.curve(b, k), t), sigma);
      }
      if (!any) return 0.0;
      for (std::size_t k = 0; k < 3; ++k) c[k] = logw[k] == kernels::kNegInf ? kernels::kNegInf : c[k] + logw[k];
      return kernels::log_sum_exp(c);
    };
    if (granularity == Granularity::kSubject) {
      total += mix(0, s.times.size());
    } else {
      for (std::size_t l = 0; l < s.times.size(); ++l) total += mix(l, l + 1);
    }
  }
  return total;
}

}  // namespace

ShiftEstimate estimate_time_shifts(const CohortData& data, const ModelState& state,
                                   const Hyperparameters& hyper, double lo, double hi,
                                   double grid_step) {
  if (!(lo < hi)) throw std::invalid_argument("shift window is empty (lo >= hi)");
  if (!(grid_step > 0.0)) throw std::invalid_argument("shift grid step must be > 0");
  state.check_dimensions(data);
  data.validate();

  std::vector<double> grid;
  const auto n_steps = static_cast<long>(std::floor((hi - lo) / grid_step + 1e-9));
  for (long i = 0; i <= n_steps; ++i) grid.push_back(lo + static_cast<double>(i) * grid_step);
  auto closer_to_zero = [](double a, double b) {
    return std::abs(a) < std::abs(b) || (std::abs(a) == std::abs(b) && a < b);
  };
  std::sort(grid.begin(), grid.end(), closer_to_zero);

  ShiftEstimate est;
  est.lo = lo;
  est.hi = hi;
  est.grid_step = grid_step;
  const std::size_t n_j = data.n_subjects();
  est.raw_shifts.resize(n_j);
  const auto n = static_cast<std::ptrdiff_t>(n_j);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t ji = 0; ji < n; ++ji) {
    const auto j = static_cast<std::size_t>(ji);
    const auto& s = data.subjects[j];
    // The current shift is a candidate so the search can never lose ground.
    std::vector<double> candidates = grid;
    const double current = data.shift(j);
    candidates.insert(std::upper_bound(candidates.begin(), candidates.end(), current, closer_to_zero),
                      current);
    double best_shift = candidates.front();
    double best = -std::numeric_limits<double>::infinity();
    for (double c : candidates) {
      const double v = subject_loglik(s, state, j, hyper.granularity, c);
      if (v > best) {
        best = v;
        best_shift = c;
      }
    }
    est.raw_shifts[j] = best_shift;
  }

  double mean = 0.0;
  for (double d : est.raw_shifts) mean += d;
  mean /= static_cast<double>(std::max<std::size_t>(n_j, 1));
  est.recentre_offset = mean;
  est.shifts.resize(n_j);
  for (std::size_t j = 0; j < n_j; ++j) est.shifts[j] = est.raw_shifts[j] - mean;
  return est;
}

ModelState translate_midpoints(const ModelState& state, double offset) {
  ModelState s = state;
  for (auto* curves : {&s.shared, &s.sub1, &s.sub2})
    for (auto& p : *curves) p.midpoint -= offset;
  return s;
}

CohortData with_shifts(CohortData data, std::vector<double> shifts) {
  if (shifts.size() != data.n_subjects())
    throw std::invalid_argument("one shift per subject required");
  data.time_shifts = std::move(shifts);
  return data;
}

ShiftEstimate align_to_shared(const CohortData& data, const Hyperparameters& hyper, double lo,
                              double hi, double grid_step, int max_iterations) {
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  CohortData current = data;
  if (current.time_shifts.empty()) current.time_shifts.assign(current.n_subjects(), 0.0);
  const std::size_t n_b = current.n_biomarkers();

  ModelState state;
  state.pi.assign(current.n_subjects(), 0.5);
  state.xi.assign(n_b, 1.0);
  state.sigma.assign(n_b, 1.0);
  state.shared.assign(n_b, SigmoidParams{1.0, 1.0, 0.0});
  {
    const UnitIndex index = build_unit_index(current, Granularity::kSubject);
    for (std::size_t b = 0; b < n_b; ++b) {
      const auto& obs = index.biomarkers[b];
      if (obs.size() == 0) continue;
      const double x_hi = *std::max_element(obs.x.begin(), obs.x.end());
      const auto [t_lo, t_hi] = std::minmax_element(obs.t.begin(), obs.t.end());
      const double span = std::max(*t_hi - *t_lo, 1.0);
      state.shared[b] = {std::max(x_hi, 1e-3), 4.0 / span, 0.5 * (*t_lo + *t_hi)};
    }
  }

  ShiftEstimate est;
  for (int it = 0; it < max_iterations; ++it) {
    const UnitIndex index = build_unit_index(current, Granularity::kSubject);
    for (std::size_t b = 0; b < n_b; ++b) {
      const auto& obs = index.biomarkers[b];
      if (obs.size() == 0) continue;
      const std::vector<double> w(index.n_units(), 1.0);
      state.shared[b] = m_step_theta(obs, w, state.shared[b], state.sigma[b]);
      state.sigma[b] = m_step_sigma(weighted_sse(obs, w, state.shared[b]),
                                    static_cast<double>(obs.size()), hyper.beta_noise);
    }
    state.sub1 = state.shared;
    state.sub2 = state.shared;
    est = estimate_time_shifts(current, state, hyper, lo, hi, grid_step);
    state = translate_midpoints(state, est.recentre_offset);
    const bool settled = est.shifts == current.time_shifts;
    current.time_shifts = est.shifts;
    if (settled) break;
  }
  return est;
}

namespace {

AlternatingFit alternate_from(CohortData current, const Hyperparameters& hyper,
                              const FitConfig& config, int outer_rounds, double lo, double hi,
                              double grid_step) {
  AlternatingFit out;
  std::vector<double> trace;
  FitConfig round_config = config;
  for (int round = 0; round < outer_rounds; ++round) {
    FittedModel model = fit(current, hyper, round_config);
    trace.insert(trace.end(), round == 0 ? model.objective_trace.begin()
                                         : model.objective_trace.begin() + 1,
                 model.objective_trace.end());

    ShiftEstimate est = estimate_time_shifts(current, model.state, hyper, lo, hi, grid_step);
    model.state = translate_midpoints(model.state, est.recentre_offset);
    current.time_shifts = est.shifts;
    trace.push_back(log_posterior(current, model.state, hyper));

    round_config.restarts = 1;
    round_config.init_overrides = model.state;
    out.model = std::move(model);
    out.shifts = std::move(est);
  }
  out.model.objective_trace = std::move(trace);
  return out;
}

}  // namespace

AlternatingFit alternate_fit(const CohortData& data, const Hyperparameters& hyper,
                             const FitConfig& config, int outer_rounds, double lo, double hi,
                             double grid_step, int align_iterations) {
  if (outer_rounds < 1) throw std::invalid_argument("outer_rounds must be >= 1");
  if (align_iterations < 0) throw std::invalid_argument("align_iterations must be >= 0");
  CohortData current = data;
  if (current.time_shifts.empty()) current.time_shifts.assign(current.n_subjects(), 0.0);

  AlternatingFit best = alternate_from(current, hyper, config, outer_rounds, lo, hi, grid_step);
  if (align_iterations == 0) return best;
  // Aligned start: wins when the data carry a real stagger; the plain start
  // wins when a split would otherwise be mistaken for one.
  current.time_shifts = align_to_shared(current, hyper, lo, hi, grid_step, align_iterations).shifts;
  AlternatingFit aligned = alternate_from(current, hyper, config, outer_rounds, lo, hi, grid_step);
  return aligned.model.objective() > best.model.objective() ? aligned : best;
}

}  // namespace dpmost
