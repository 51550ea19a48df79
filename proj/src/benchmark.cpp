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

#include "dpmost/benchmark.hpp"

#include <algorithm>
#include <exception>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "dpmost/rng.hpp"

namespace dpmost {

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
  std::nth_element(values.begin(), mid, values.end());
  if (values.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

CurveSet estimated_curves(const ModelState& state, std::size_t b, std::span<const double> grid) {
  CurveSet set;
  set.eval_grid.assign(grid.begin(), grid.end());
  if (state.split_confidence(b) > 0.5) {
    set.curves = {state.sub1[b], state.sub2[b]};
  } else {
    set.curves = {state.shared[b]};
  }
  return set;
}

Evaluation evaluate_fit(const ModelState& state, const GroundTruth& truth) {
  const std::size_t n_b = truth.true_curves.size();
  if (state.n_biomarkers() != n_b || state.n_subjects() != truth.subject_population.size())
    throw std::invalid_argument("model and ground truth have different dimensions");
  const auto grid = uniform_grid(truth.time_lo, truth.time_hi, kOspaGridPoints);

  Evaluation e;
  for (std::size_t b = 0; b < n_b; ++b) {
    const CurveSet true_set{truth.true_curves[b], grid};
    const CurveSet est_set = estimated_curves(state, b, grid);
    e.ospa.push_back(ospa(true_set, est_set));
    e.unmatched.push_back(unmatched_curves(true_set, est_set));
    e.split_scores.push_back(state.split_confidence(b));
  }
  e.ospa_mean = std::accumulate(e.ospa.begin(), e.ospa.end(), 0.0) / static_cast<double>(n_b);
  e.sigma_error = sigma_relative_error(truth.true_sigma, state.sigma);
  e.sigma_error_mean = std::accumulate(e.sigma_error.begin(), e.sigma_error.end(), 0.0) / static_cast<double>(n_b);
  e.split_flags = truth.split_flags;
  for (int p : truth.subject_population) e.in_sub1.push_back(p == 1);
  const auto aligned = align_memberships(state.pi, e.in_sub1);
  e.membership_scores = aligned.aligned;
  e.labels_swapped = aligned.swapped;
  e.assignment_accuracy = aligned.accuracy;
  return e;
}

std::uint64_t dataset_seed(std::uint64_t base, std::size_t cell, int repetition) noexcept {
  return derive_seed(derive_seed(base, cell), static_cast<std::uint64_t>(repetition));
}

BenchmarkReport run_benchmark(const BenchmarkGrid& grid, int repetitions) {
  if (repetitions < 1) throw std::invalid_argument("repetitions must be >= 1");
  BenchmarkReport report;
  for (std::size_t n_b : grid.n_biomarkers)
    for (SnrLevel snr : grid.snr_levels) {
      CellSummary cell;
      cell.n_biomarkers = n_b;
      cell.snr = snr;
      report.cells.push_back(cell);
    }
  const std::size_t n_cells = report.cells.size();
  report.datasets.resize(n_cells * static_cast<std::size_t>(repetitions));

  const auto n_tasks = static_cast<std::ptrdiff_t>(report.datasets.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t task = 0; task < n_tasks; ++task) {
    DatasetResult& r = report.datasets[static_cast<std::size_t>(task)];
    r.cell = static_cast<std::size_t>(task) / static_cast<std::size_t>(repetitions);
    r.repetition = static_cast<int>(task % repetitions);
    r.seed = dataset_seed(grid.seed, r.cell, r.repetition);
    try {
      SyntheticConfig config = grid.base;
      config.n_biomarkers = report.cells[r.cell].n_biomarkers;
      config.snr_level = report.cells[r.cell].snr;
      config.rng_seed = r.seed;
      const SyntheticDataset ds = generate_dataset(config);
      const Hyperparameters hyper = grid.hyper.value_or(Hyperparameters::defaults_for(config.n_subjects));
      FitConfig fit_config = grid.fit;
      fit_config.rng_seed = derive_seed(r.seed, 1);
      const FittedModel model = fit(ds.data, hyper, fit_config);
      r.evaluation = evaluate_fit(model.state, ds.truth);
      r.objective = model.objective();
      r.iterations = model.iterations();
      r.converged = model.converged;
      r.ok = true;
    } catch (const std::exception& ex) {
      r.ok = false;
      r.error = ex.what();
    }
  }

  for (std::size_t c = 0; c < n_cells; ++c) {
    CellSummary& cell = report.cells[c];
    std::vector<double> ospa, sigma, accuracy, xi_scores, pi_scores;
    std::vector<bool> xi_labels, pi_labels;
    for (const auto& r : report.datasets) {
      if (r.cell != c) continue;
      if (!r.ok) {
        ++cell.n_failed;
        continue;
      }
      ++cell.n_ok;
      const Evaluation& e = r.evaluation;
      ospa.push_back(e.ospa_mean);
      sigma.push_back(e.sigma_error_mean);
      accuracy.push_back(e.assignment_accuracy);
      xi_scores.insert(xi_scores.end(), e.split_scores.begin(), e.split_scores.end());
      xi_labels.insert(xi_labels.end(), e.split_flags.begin(), e.split_flags.end());
      pi_scores.insert(pi_scores.end(), e.membership_scores.begin(), e.membership_scores.end());
      pi_labels.insert(pi_labels.end(), e.in_sub1.begin(), e.in_sub1.end());
    }
    cell.flagged = 2 * cell.n_failed > repetitions;
    cell.median_ospa = median(ospa);
    cell.median_sigma_error = median(sigma);
    cell.median_accuracy = median(accuracy);
    auto both_classes = [](const std::vector<bool>& v) {
      return std::find(v.begin(), v.end(), true) != v.end() &&
             std::find(v.begin(), v.end(), false) != v.end();
    };
    if (both_classes(xi_labels)) cell.roc_xi = roc_auc(xi_scores, xi_labels);
    if (both_classes(pi_labels)) cell.roc_pi = roc_auc(pi_scores, pi_labels);
  }
  return report;
}

}  // namespace dpmost
