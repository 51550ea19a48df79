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
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dpmost/em.hpp"
#include "dpmost/metrics.hpp"
#include "dpmost/synthetic.hpp"

namespace dpmost {

/// Scores of one fitted model against its generating truth.
struct Evaluation {
  std::vector<double> ospa;  // per biomarker
  std::vector<std::size_t> unmatched;
  double ospa_mean = 0.0;
  std::vector<double> sigma_error;  // per biomarker relative error
  double sigma_error_mean = 0.0;
  std::vector<double> split_scores;  // 1 - xi
  std::vector<bool> split_flags;
  std::vector<double> membership_scores;  // pi aligned to the true labels
  std::vector<bool> in_sub1;
  bool labels_swapped = false;
  double assignment_accuracy = 0.0;

  friend bool operator==(const Evaluation&, const Evaluation&) = default;
};

inline constexpr std::size_t kOspaGridPoints = 100;

// Biomarkers with split confidence above 0.5 contribute their two
// sub-trajectories to OSPA, otherwise the shared one.
CurveSet estimated_curves(const ModelState& state, std::size_t b, std::span<const double> grid);

Evaluation evaluate_fit(const ModelState& state, const GroundTruth& truth);

struct BenchmarkGrid {
  std::vector<std::size_t> n_biomarkers{2, 5, 10};
  std::vector<SnrLevel> snr_levels{SnrLevel::kLow, SnrLevel::kNormal, SnrLevel::kHigh};
  SyntheticConfig base;  // n_biomarkers, snr_level and rng_seed are set per dataset
  std::optional<Hyperparameters> hyper;  // defaults to 15% of the subject count
  FitConfig fit;
  std::uint64_t seed = 0;
};

struct DatasetResult {
  std::size_t cell = 0;
  int repetition = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  Evaluation evaluation;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct CellSummary {
  std::size_t n_biomarkers = 0;
  SnrLevel snr = SnrLevel::kNormal;
  int n_ok = 0;
  int n_failed = 0;
  bool flagged = false;  // more than half of the fits failed
  double median_ospa = 0.0;
  double median_sigma_error = 0.0;
  double median_accuracy = 0.0;
  std::optional<RocResult> roc_xi;  // pooled over repetitions
  std::optional<RocResult> roc_pi;
};

struct BenchmarkReport {
  std::vector<CellSummary> cells;
  std::vector<DatasetResult> datasets;
};

// Seed of one dataset; independent of thread schedule.
std::uint64_t dataset_seed(std::uint64_t base, std::size_t cell, int repetition) noexcept;

BenchmarkReport run_benchmark(const BenchmarkGrid& grid, int repetitions);

double median(std::vector<double> values);

}  // namespace dpmost
