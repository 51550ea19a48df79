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

#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "dpmost/benchmark.hpp"
#include "dpmost/error.hpp"
#include "dpmost/synthetic.hpp"

using namespace dpmost;

namespace {

double fine_mse(const SigmoidParams& a, const SigmoidParams& b, double lo, double hi, int n) {
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    const double d = sigmoid_eval(a, t) - sigmoid_eval(b, t);
    total += d * d;
  }
  return total / n;
}

}  // namespace

TEST_CASE("generate_dataset default shape") {
  SyntheticConfig cfg;
  cfg.rng_seed = 1;
  const auto ds = generate_dataset(cfg);
  CHECK(ds.data.n_subjects() == 100);
  CHECK(ds.data.n_biomarkers() == 2);
  CHECK(ds.data.n_observations() == 200);
  for (const auto& s : ds.data.subjects) {
    REQUIRE(s.times.size() == 1);
    CHECK(s.times[0] >= 0.0);
    CHECK(s.times[0] <= 20.0);
  }
  CHECK_NOTHROW(ds.data.validate());
}

TEST_CASE("split_fraction rounds up") {
  for (auto [b, expected] : {std::pair{2, 1}, {5, 3}, {10, 5}}) {
    SyntheticConfig cfg;
    cfg.n_biomarkers = static_cast<std::size_t>(b);
    cfg.rng_seed = 3;
    const auto ds = generate_dataset(cfg);
    int n = 0;
    for (bool f : ds.truth.split_flags) n += f;
    CHECK(n == expected);
    for (std::size_t k = 0; k < cfg.n_biomarkers; ++k)
      CHECK(ds.truth.true_curves[k].size() == (ds.truth.split_flags[k] ? 2u : 1u));
  }
}

TEST_CASE("zero noise puts every observation on its curve") {
  // Up to the rounding of raw time = disease time - shift.
  SyntheticConfig cfg;
  cfg.n_biomarkers = 5;
  cfg.noise_std = 0.0;
  cfg.points_per_subject = 3;
  cfg.shift_stagger = 1.0;
  cfg.rng_seed = 4;
  const auto ds = generate_dataset(cfg);
  for (std::size_t j = 0; j < ds.data.n_subjects(); ++j) {
    const auto& s = ds.data.subjects[j];
    const int pop = ds.truth.subject_population[j];
    for (std::size_t b = 0; b < 5; ++b) {
      const auto& curves = ds.truth.true_curves[b];
      const auto& c = curves.size() == 2 ? curves[pop - 1] : curves[0];
      for (std::size_t l = 0; l < s.times.size(); ++l)
        CHECK(*s.values[b][l] == doctest::Approx(sigmoid_eval(c, s.times[l] + ds.truth.true_shifts[j])).epsilon(1e-12));
    }
  }
}

TEST_CASE("labels are balanced") {
  for (std::size_t n : {2u, 7u, 100u, 101u}) {
    SyntheticConfig cfg;
    cfg.n_subjects = n;
    cfg.rng_seed = n;
    const auto ds = generate_dataset(cfg);
    int ones = 0;
    for (int p : ds.truth.subject_population) ones += p == 1;
    const int twos = static_cast<int>(n) - ones;
    CHECK(std::abs(ones - twos) <= 1);
    for (std::size_t j = 0; j < n; ++j)
      CHECK(ds.data.subjects[j].label == (ds.truth.subject_population[j] == 1 ? "subpop1" : "subpop2"));
  }
}

TEST_CASE("empirical noise matches noise_std") {
  SyntheticConfig cfg;
  cfg.n_subjects = 10000;
  cfg.n_biomarkers = 2;
  cfg.noise_std = 0.5;
  cfg.rng_seed = 9;
  const auto ds = generate_dataset(cfg);
  double sum = 0.0, sq = 0.0;
  std::size_t n = 0;
  for (std::size_t j = 0; j < ds.data.n_subjects(); ++j) {
    const auto& s = ds.data.subjects[j];
    const int pop = ds.truth.subject_population[j];
    for (std::size_t b = 0; b < 2; ++b) {
      const auto& curves = ds.truth.true_curves[b];
      const auto& c = curves.size() == 2 ? curves[pop - 1] : curves[0];
      const double r = *s.values[b][0] - sigmoid_eval(c, s.times[0]);
      sum += r;
      sq += r * r;
      ++n;
    }
  }
  const double mean = sum / static_cast<double>(n);
  const double sd = std::sqrt(sq / static_cast<double>(n) - mean * mean);
  CHECK(std::abs(sd - 0.5) <= 0.02 * 0.5);
}

TEST_CASE("split biomarkers reach the target separation") {
  for (auto level : {SnrLevel::kLow, SnrLevel::kNormal, SnrLevel::kHigh}) {
    SyntheticConfig cfg;
    cfg.n_biomarkers = 10;
    cfg.snr_level = level;
    cfg.rng_seed = 12;
    const auto ds = generate_dataset(cfg);
    for (std::size_t b = 0; b < 10; ++b) {
      if (!ds.truth.split_flags[b]) continue;
      const auto& c = ds.truth.true_curves[b];
      const double m = curve_mse(c[0], c[1], 0.0, 20.0, kCalibrationGrid);
      CHECK(m >= 0.99 * target_mse(level));
      CHECK(m <= 1.01 * target_mse(level));
    }
  }
}

TEST_CASE("calibrate_separation examples") {
  std::mt19937_64 rng(5);
  const SigmoidParams base{2.0, 1.0, 10.0};

  SUBCASE("target 0.5") {
    const auto other = calibrate_separation(base, 0.5, 0.0, 20.0, kCalibrationGrid, rng);
    const double m = curve_mse(base, other, 0.0, 20.0, kCalibrationGrid);
    CHECK(m >= 0.495);
    CHECK(m <= 0.505);
  }
  SUBCASE("target 1.0 holds on a ten times finer grid") {
    const auto other = calibrate_separation(base, 1.0, 0.0, 20.0, 200, rng);
    CHECK(std::abs(fine_mse(base, other, 0.0, 20.0, 2000) - 1.0) <= 0.02);
    CHECK(other.supremum >= 0.5);
    CHECK(other.supremum <= 8.0);
    CHECK(other.growth_rate >= 0.1);
    CHECK(other.growth_rate <= 3.0);
  }
  SUBCASE("zero perturbation gives zero separation") {
    CHECK(curve_mse(base, perturb(base, {0.3, -0.2, 0.5}, 0.0), 0.0, 20.0, 200) == 0.0);
  }
  SUBCASE("an unreachable target fails") {
    CHECK_THROWS_AS(calibrate_separation(base, 1e3, 0.0, 20.0, 200, rng), FitError);
  }
  SUBCASE("bad input") {
    CHECK_THROWS_AS(calibrate_separation(base, 0.0, 0.0, 20.0, 200, rng), std::invalid_argument);
  }
}

TEST_CASE("generate_dataset is deterministic and validates its config") {
  SyntheticConfig cfg;
  cfg.n_biomarkers = 5;
  cfg.rng_seed = 77;
  const auto a = generate_dataset(cfg);
  const auto b = generate_dataset(cfg);
  CHECK(a.data == b.data);
  CHECK(a.truth == b.truth);
  cfg.rng_seed = 78;
  CHECK_FALSE(generate_dataset(cfg).data == a.data);

  cfg.n_subjects = 1;
  CHECK_THROWS_AS(generate_dataset(cfg), std::invalid_argument);
  cfg.n_subjects = 10;
  cfg.points_per_subject = 30;
  CHECK_THROWS_AS(generate_dataset(cfg), std::invalid_argument);
  CHECK(snr_from_string("high") == SnrLevel::kHigh);
  CHECK_THROWS(snr_from_string("extreme"));
}

TEST_CASE("run_benchmark is deterministic and shaped by the grid") {
  BenchmarkGrid grid;
  grid.n_biomarkers = {2, 5};
  grid.snr_levels = {SnrLevel::kHigh};
  grid.base.n_subjects = 40;
  grid.fit.restarts = 1;
  grid.seed = 3;
  const auto a = run_benchmark(grid, 2);
  const auto b = run_benchmark(grid, 2);
  REQUIRE(a.cells.size() == 2);
  REQUIRE(a.datasets.size() == 4);
  for (std::size_t i = 0; i < a.datasets.size(); ++i) {
    CHECK(a.datasets[i].seed == b.datasets[i].seed);
    CHECK(a.datasets[i].ok);
    CHECK(a.datasets[i].evaluation == b.datasets[i].evaluation);
    CHECK(a.datasets[i].objective == b.datasets[i].objective);
  }
  for (std::size_t c = 0; c < 2; ++c) {
    CHECK(a.cells[c].n_ok == 2);
    CHECK_FALSE(a.cells[c].flagged);
    CHECK(a.cells[c].median_ospa == b.cells[c].median_ospa);
    CHECK(a.cells[c].median_accuracy == b.cells[c].median_accuracy);
  }
  CHECK(a.cells[0].n_biomarkers == 2);
  CHECK(a.cells[1].n_biomarkers == 5);
  CHECK_THROWS_AS(run_benchmark(grid, 0), std::invalid_argument);
}

TEST_CASE("run_benchmark records fit failures") {
  BenchmarkGrid grid;
  grid.n_biomarkers = {2};
  grid.snr_levels = {SnrLevel::kLow};
  grid.base.n_subjects = 20;
  // Separation unreachable inside the plausible curve box.
  grid.base.separation_mse = 1e3;
  const auto r = run_benchmark(grid, 2);
  CHECK(r.cells[0].n_failed == 2);
  CHECK(r.cells[0].flagged);
  CHECK_FALSE(r.datasets[0].ok);
  CHECK_FALSE(r.datasets[0].error.empty());
}

TEST_CASE("dataset seeds differ across cells and repetitions") {
  CHECK(dataset_seed(1, 0, 0) != dataset_seed(1, 0, 1));
  CHECK(dataset_seed(1, 0, 0) != dataset_seed(1, 1, 0));
  CHECK(dataset_seed(1, 0, 0) != dataset_seed(2, 0, 0));
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
}
