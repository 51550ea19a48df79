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
#include "dpmost/em.hpp"
#include "dpmost/synthetic.hpp"
#include "dpmost/timeshift.hpp"
#include "test_support.hpp"

using namespace dpmost;
using dpmost::testing::cohort;
using dpmost::testing::subject;
using dpmost::testing::uniform_state;

namespace {

const SigmoidParams kCurve{3.0, 0.6, 10.0};

// Subjects observed at raw times 4..12, on the curve after adding `shift`.
SubjectSeries on_curve(std::string id, double shift) {
  std::vector<double> t;
  std::vector<std::optional<double>> x;
  for (double raw = 4.0; raw <= 12.0; raw += 2.0) {
    t.push_back(raw);
    x.push_back(sigmoid_eval(kCurve, raw + shift));
  }
  return subject(std::move(id), t, {x});
}

}  // namespace

TEST_CASE("estimate_time_shifts recovers a known translation") {
  const CohortData data = cohort({on_curve("a", 0.0), on_curve("b", 0.0), on_curve("c", 3.0)}, 1);
  const ModelState st = uniform_state(1, 3, kCurve, 0.2);
  const auto est = estimate_time_shifts(data, st, {}, -10.0, 10.0, 0.05);
  CHECK(std::abs(est.raw_shifts[2] - 3.0) <= 0.05);
  CHECK(est.raw_shifts[0] == 0.0);
  CHECK(est.raw_shifts[1] == 0.0);
  CHECK(est.recentre_offset == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(est.shifts[0] == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("estimate_time_shifts re-centres equal shifts to zero") {
  const CohortData data = cohort({on_curve("a", 2.0), on_curve("b", 2.0)}, 1);
  const auto est = estimate_time_shifts(data, uniform_state(1, 2, kCurve, 0.2), {}, -5.0, 5.0, 0.1);
  CHECK(est.raw_shifts[0] == doctest::Approx(2.0));
  for (double s : est.shifts) CHECK(std::abs(s) < 1e-12);
}

TEST_CASE("estimate_time_shifts breaks ties toward the smaller shift") {
  // A flat curve gives every candidate the same likelihood.
  const SigmoidParams flat{2.0, 1.0, -1000.0};
  const CohortData data = cohort({subject("a", {1.0}, {{2.0}}), subject("b", {2.0}, {{1.9}})}, 1);
  const auto est = estimate_time_shifts(data, uniform_state(1, 2, flat, 1.0), {}, -3.0, 3.0, 0.5);
  CHECK(est.raw_shifts[0] == 0.0);
  CHECK(est.raw_shifts[1] == 0.0);
}

TEST_CASE("estimate_time_shifts rejects an empty window") {
  const CohortData data = cohort({on_curve("a", 0.0), on_curve("b", 0.0)}, 1);
  const auto st = uniform_state(1, 2, kCurve, 0.2);
  CHECK_THROWS_AS(estimate_time_shifts(data, st, {}, 1.0, 1.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(estimate_time_shifts(data, st, {}, -1.0, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("shift estimation never lowers the objective") {
  SyntheticConfig cfg;
  cfg.n_subjects = 60;
  cfg.n_biomarkers = 3;
  cfg.points_per_subject = 3;
  cfg.shift_stagger = 1.5;
  cfg.rng_seed = 2;
  const auto ds = generate_dataset(cfg);
  const auto hyper = Hyperparameters::defaults_for(60);
  FitConfig fc;
  fc.rng_seed = 4;
  const auto m = fit(ds.data, hyper, fc);
  // A coarse grid that does not contain the current (zero) shift must still
  // keep it as a candidate.
  const auto est = estimate_time_shifts(ds.data, m.state, hyper, -4.05, 4.0, 0.3);
  const CohortData moved = with_shifts(ds.data, est.shifts);
  const double before = log_posterior(ds.data, m.state, hyper);
  const double after = log_posterior(moved, translate_midpoints(m.state, est.recentre_offset), hyper);
  CHECK(after >= before - 1e-9 * std::abs(before));
}

TEST_CASE("joint translation of shifts and midpoints leaves the objective unchanged") {
  SyntheticConfig cfg;
  cfg.n_subjects = 40;
  cfg.n_biomarkers = 2;
  cfg.points_per_subject = 2;
  cfg.rng_seed = 3;
  const auto ds = generate_dataset(cfg);
  const auto st = dpmost::testing::truth_state(ds.truth, 0.3, 0.7, 0.8, 0.2);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<double> shifts(40);
  for (auto& s : shifts) s = u(rng);
  for (auto g : {Granularity::kSubject, Granularity::kObservation}) {
    const Hyperparameters hyper{6.0, 6.0, g};
    const double base = log_posterior(with_shifts(ds.data, shifts), st, hyper);
    for (double offset : {-2.5, 0.7, 4.0}) {
      auto moved = shifts;
      for (auto& s : moved) s -= offset;
      const double v = log_posterior(with_shifts(ds.data, moved), translate_midpoints(st, offset), hyper);
      CHECK(v == doctest::Approx(base).epsilon(1e-10));
    }
  }
}

TEST_CASE("alternate_fit with no true shifts keeps shifts near zero") {
  SyntheticConfig cfg;
  cfg.n_subjects = 50;
  cfg.n_biomarkers = 3;
  cfg.points_per_subject = 4;
  cfg.noise_std = 0.0;
  cfg.rng_seed = 7;
  const auto ds = generate_dataset(cfg);
  FitConfig fc;
  // Three restarts land in a local optimum on this cohort.
  fc.restarts = 5;
  fc.rng_seed = 1;
  const auto out = alternate_fit(ds.data, Hyperparameters::defaults_for(50), fc, 1, -5.0, 5.0, 0.1);
  for (double s : out.shifts.shifts) CHECK(std::abs(s) <= 0.1 + 1e-9);
}

TEST_CASE("alternate_fit recovers staggered shifts with a non-decreasing trace") {
  SyntheticConfig cfg;
  cfg.n_subjects = 60;
  cfg.n_biomarkers = 3;
  cfg.points_per_subject = 4;
  cfg.visit_interval = 1.5;
  cfg.noise_std = 0.0;
  cfg.shift_stagger = 2.0;
  // With split biomarkers the stagger can be traded for a split, see below.
  cfg.split_fraction = 0.0;
  cfg.rng_seed = 11;
  const auto ds = generate_dataset(cfg);
  FitConfig fc;
  fc.restarts = 3;
  fc.rng_seed = 5;
  const double step = 0.1;
  const auto out = alternate_fit(ds.data, Hyperparameters::defaults_for(60), fc, 3, -5.0, 5.0, step);

  double mean_true = 0.0;
  for (double s : ds.truth.true_shifts) mean_true += s / 60.0;
  double sq = 0.0;
  for (std::size_t j = 0; j < 60; ++j) {
    const double d = out.shifts.shifts[j] - (ds.truth.true_shifts[j] - mean_true);
    sq += d * d;
  }
  const double rmse = std::sqrt(sq / 60.0);
  MESSAGE("shift rmse " << rmse);
  CHECK(rmse <= step);

  const auto& tr = out.model.objective_trace;
  for (std::size_t i = 1; i < tr.size(); ++i) CHECK(tr[i] >= tr[i - 1] - 1e-8 * std::abs(tr[i - 1]));
}

TEST_CASE("align_to_shared removes a pure stagger") {
  std::vector<SubjectSeries> subjects;
  for (int j = 0; j < 20; ++j) subjects.push_back(on_curve("s" + std::to_string(j), j % 2 ? 2.0 : -2.0));
  const CohortData data = cohort(subjects, 1);
  const auto est = align_to_shared(data, {}, -5.0, 5.0, 0.1, 50);
  for (int j = 0; j < 20; ++j) CHECK(est.shifts[j] == doctest::Approx(j % 2 ? 2.0 : -2.0).epsilon(1e-9));
}

TEST_CASE("alternate_fit rejects zero rounds") {
  const CohortData data = cohort({on_curve("a", 0.0), on_curve("b", 0.0)}, 1);
  CHECK_THROWS_AS(alternate_fit(data, {}, {}, 0, -1.0, 1.0, 0.1), std::invalid_argument);
}
