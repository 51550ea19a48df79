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
#include <random>
#include <string_view>
#include <vector>

#include "dpmost/cohort.hpp"
#include "dpmost/sigmoid.hpp"

namespace dpmost {

// Difficulty levels, defined by the mean squared difference between the two
// sub-trajectories of a split biomarker.
enum class SnrLevel { kLow, kNormal, kHigh };

double target_mse(SnrLevel level) noexcept;
std::string_view to_string(SnrLevel level) noexcept;
SnrLevel snr_from_string(std::string_view s);

struct SyntheticConfig {
  std::size_t n_subjects = 100;
  std::size_t n_biomarkers = 2;
  SnrLevel snr_level = SnrLevel::kNormal;
  // Overrides the level's MSE when positive.
  double separation_mse = 0.0;
  double noise_std = 0.5;
  double time_lo = 0.0;
  double time_hi = 20.0;
  std::size_t points_per_subject = 1;
  double visit_interval = 1.0;
  double split_fraction = 0.5;
  // Subjects alternate between shifts of +stagger and -stagger.
  double shift_stagger = 0.0;
  std::uint64_t rng_seed = 0;

  double separation() const noexcept {
    return separation_mse > 0.0 ? separation_mse : target_mse(snr_level);
  }
  std::size_t n_split() const noexcept;
  void validate() const;
};

struct GroundTruth {
  std::vector<bool> split_flags;
  std::vector<int> subject_population;  // 1 or 2
  std::vector<std::vector<SigmoidParams>> true_curves;  // {sub1} or {sub1, sub2}
  std::vector<double> true_sigma;
  std::vector<double> true_shifts;
  double time_lo = 0.0;
  double time_hi = 20.0;

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

struct SyntheticDataset {
  CohortData data;
  GroundTruth truth;
};

SyntheticDataset generate_dataset(const SyntheticConfig& config);

inline constexpr int kCalibrationGrid = 200;

// (1/N) sum over an N-point uniform grid on [lo, hi] of (f_a - f_b)^2.
double curve_mse(const SigmoidParams& a, const SigmoidParams& b, double lo, double hi,
                 int grid_size);

// Base parameters moved by `magnitude` along `direction` in
// (ln supremum, ln growth_rate, midpoint) coordinates.
SigmoidParams perturb(const SigmoidParams& base, const std::array<double, 3>& direction,
                      double magnitude);

/// Second curve whose grid MSE against `base` is within 1% of `target`.
///
/// Tries random directions and bisects the perturbation magnitude along each.
/// The result must keep supremum in [0.5, 8], growth_rate in [0.1, 3] and
/// midpoint in [lo, hi]; throws FitError when no direction qualifies.
SigmoidParams calibrate_separation(const SigmoidParams& base, double target, double lo,
                                   double hi, int grid_size, std::mt19937_64& rng);

}  // namespace dpmost
