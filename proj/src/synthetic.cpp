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

#include "dpmost/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>
#include <string>

#include "dpmost/error.hpp"

namespace dpmost {

double target_mse(SnrLevel level) noexcept {
  switch (level) {
    case SnrLevel::kLow: return 0.1;
    case SnrLevel::kNormal: return 0.5;
    case SnrLevel::kHigh: return 1.0;
  }
  return 0.5;
}

std::string_view to_string(SnrLevel level) noexcept {
  switch (level) {
    case SnrLevel::kLow: return "low";
    case SnrLevel::kNormal: return "normal";
    case SnrLevel::kHigh: return "high";
  }
  return "normal";
}

SnrLevel snr_from_string(std::string_view s) {
  if (s == "low") return SnrLevel::kLow;
  if (s == "normal") return SnrLevel::kNormal;
  if (s == "high") return SnrLevel::kHigh;
  throw std::invalid_argument("unknown SNR level '" + std::string(s) + "'");
}

std::size_t SyntheticConfig::n_split() const noexcept {
  return static_cast<std::size_t>(std::ceil(static_cast<double>(n_biomarkers) * split_fraction - 1e-9));
}

void SyntheticConfig::validate() const {
  if (n_subjects < 2) throw std::invalid_argument("n_subjects must be >= 2");
  if (n_biomarkers < 1) throw std::invalid_argument("n_biomarkers must be >= 1");
  if (!(noise_std >= 0.0)) throw std::invalid_argument("noise_std must be >= 0");
  if (!(time_hi > time_lo)) throw std::invalid_argument("time range is empty");
  if (points_per_subject < 1) throw std::invalid_argument("points_per_subject must be >= 1");
  if (!(visit_interval >= 0.0) ||
      static_cast<double>(points_per_subject - 1) * visit_interval > time_hi - time_lo)
    throw std::invalid_argument("visits do not fit in the time range");
  if (!(split_fraction >= 0.0 && split_fraction <= 1.0))
    throw std::invalid_argument("split_fraction must be in [0,1]");
  if (!(shift_stagger >= 0.0)) throw std::invalid_argument("shift_stagger must be >= 0");
  if (!(separation() > 0.0)) throw std::invalid_argument("separation MSE must be > 0");
}

double curve_mse(const SigmoidParams& a, const SigmoidParams& b, double lo, double hi,
                 int grid_size) {
  if (grid_size < 2) throw std::invalid_argument("grid_size must be >= 2");
  double total = 0.0;
  const double step = (hi - lo) / (grid_size - 1);
  for (int i = 0; i < grid_size; ++i) {
    const double t = lo + step * i;
    const double d = sigmoid_eval(a, t) - sigmoid_eval(b, t);
    total += d * d;
  }
  return total / grid_size;
}

SigmoidParams perturb(const SigmoidParams& base, const std::array<double, 3>& direction,
                      double magnitude) {
  return {base.supremum * std::exp(magnitude * direction[0]),
          base.growth_rate * std::exp(magnitude * direction[1]),
          base.midpoint + magnitude * direction[2]};
}

namespace {

// Keeps partner curves in the same family as the sampled ones: no step
// functions and a transition inside the observation window.
bool plausible(const SigmoidParams& p, double lo, double hi) {
  return p.supremum >= 0.5 && p.supremum <= 8.0 && p.growth_rate >= 0.1 && p.growth_rate <= 3.0 &&
         p.midpoint >= lo && p.midpoint <= hi;
}

}  // namespace

SigmoidParams calibrate_separation(const SigmoidParams& base, double target, double lo,
                                   double hi, int grid_size, std::mt19937_64& rng) {
  if (!(target > 0.0)) throw std::invalid_argument("target MSE must be > 0");
  std::normal_distribution<double> normal(0.0, 1.0);
  const double time_scale = (hi - lo) / 4.0;
  constexpr int kAttempts = 50;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    std::array<double, 3> dir{normal(rng), normal(rng), normal(rng)};
    const double norm = std::sqrt(dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]);
    if (!(norm > 0.0)) continue;
    for (double& d : dir) d /= norm;
    dir[2] *= time_scale;

    auto mse_at = [&](double m) { return curve_mse(base, perturb(base, dir, m), lo, hi, grid_size); };
    double upper = 0.1;
    bool bracketed = false;
    for (int i = 0; i < 40 && upper < 40.0; ++i, upper *= 2.0) {
      if (mse_at(upper) > target) {
        bracketed = true;
        break;
      }
    }
    if (!bracketed) continue;
    double lower = 0.0;
    for (int step = 0; step < 100; ++step) {
      const double mid = 0.5 * (lower + upper);
      const double mse = mse_at(mid);
      if (std::abs(mse / target - 1.0) <= 1e-3) {
        const SigmoidParams second = perturb(base, dir, mid);
        if (plausible(second, lo, hi)) return second;
        break;
      }
      (mse < target ? lower : upper) = mid;
    }
  }
  throw FitError("could not calibrate a curve pair to MSE " + std::to_string(target));
}

namespace {

SigmoidParams sample_curve(std::mt19937_64& rng, double t_lo, double t_hi) {
  auto truncated = [&](double mean, double sd, double floor) {
    std::normal_distribution<double> dist(mean, sd);
    for (;;) {
      const double v = dist(rng);
      if (v > floor) return v;
    }
  };
  // Transition centred inside the window so single visits carry signal.
  const double span = t_hi - t_lo;
  std::uniform_real_distribution<double> midpoint(t_lo + 0.2 * span, t_hi - 0.2 * span);
  SigmoidParams p;
  p.supremum = truncated(3.0, 1.0, 0.5);
  p.growth_rate = truncated(0.8, 0.3, 0.1);
  p.midpoint = midpoint(rng);
  return p;
}

}  // namespace

SyntheticDataset generate_dataset(const SyntheticConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.rng_seed);
  const std::size_t n_j = config.n_subjects;
  const std::size_t n_b = config.n_biomarkers;

  SyntheticDataset out;
  GroundTruth& truth = out.truth;
  truth.time_lo = config.time_lo;
  truth.time_hi = config.time_hi;

  std::vector<std::size_t> order(n_b);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  truth.split_flags.assign(n_b, false);
  for (std::size_t i = 0; i < config.n_split(); ++i) truth.split_flags[order[i]] = true;

  truth.subject_population.assign(n_j, 2);
  std::fill_n(truth.subject_population.begin(), (n_j + 1) / 2, 1);
  std::shuffle(truth.subject_population.begin(), truth.subject_population.end(), rng);

  truth.true_shifts.assign(n_j, 0.0);
  if (config.shift_stagger > 0.0)
    for (std::size_t j = 0; j < n_j; ++j)
      truth.true_shifts[j] = (j % 2 == 0 ? 1.0 : -1.0) * config.shift_stagger;

  truth.true_curves.resize(n_b);
  for (std::size_t b = 0; b < n_b; ++b) {
    const SigmoidParams base = sample_curve(rng, config.time_lo, config.time_hi);
    truth.true_curves[b] = {base};
    if (truth.split_flags[b])
      truth.true_curves[b].push_back(calibrate_separation(
          base, config.separation(), config.time_lo, config.time_hi, kCalibrationGrid, rng));
  }
  truth.true_sigma.assign(n_b, config.noise_std);

  CohortData& data = out.data;
  for (std::size_t b = 0; b < n_b; ++b) data.biomarker_names.push_back("biomarker_" + std::to_string(b + 1));
  const double visit_span = static_cast<double>(config.points_per_subject - 1) * config.visit_interval;
  std::uniform_real_distribution<double> start(config.time_lo, config.time_hi - visit_span);
  std::normal_distribution<double> noise(0.0, config.noise_std > 0.0 ? config.noise_std : 1.0);
  data.subjects.resize(n_j);
  for (std::size_t j = 0; j < n_j; ++j) {
    SubjectSeries& s = data.subjects[j];
    char id[32];
    std::snprintf(id, sizeof id, "S%05zu", j + 1);
    s.subject_id = id;
    s.label = truth.subject_population[j] == 1 ? "subpop1" : "subpop2";
    const double t0 = start(rng);
    std::vector<double> disease_times;
    for (std::size_t l = 0; l < config.points_per_subject; ++l)
      disease_times.push_back(t0 + static_cast<double>(l) * config.visit_interval);
    for (double t : disease_times) s.times.push_back(t - truth.true_shifts[j]);
    s.values.resize(n_b);
    for (std::size_t b = 0; b < n_b; ++b) {
      const auto& curves = truth.true_curves[b];
      const auto& curve = truth.subject_population[j] == 2 && curves.size() == 2 ? curves[1] : curves[0];
      for (double t : disease_times) {
        double v = sigmoid_eval(curve, t);
        if (config.noise_std > 0.0) v += noise(rng);
        s.values[b].push_back(v);
      }
    }
  }
  return out;
}

}  // namespace dpmost
