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

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "dpmost/benchmark.hpp"
#include "dpmost/metrics.hpp"
#include "test_support.hpp"

using namespace dpmost;

namespace {

// A sigmoid that is constant (= level) on any grid well right of -1000.
SigmoidParams constant(double level) { return {level, 1.0, -1000.0}; }

// Independent enumerator: every injective map from the smaller set into the
// larger, written out case by case for sizes up to 2.
double brute_ospa(const std::vector<SigmoidParams>& x, const std::vector<SigmoidParams>& y,
                  const std::vector<double>& grid) {
  auto d = [&](const SigmoidParams& p, const SigmoidParams& q) {
    double s = 0.0;
    for (double t : grid) s += std::pow(sigmoid_eval(p, t) - sigmoid_eval(q, t), 2);
    return s / static_cast<double>(grid.size());
  };
  const auto& small = x.size() <= y.size() ? x : y;
  const auto& large = x.size() <= y.size() ? y : x;
  if (small.size() == 1) {
    double best = d(small[0], large[0]);
    if (large.size() == 2) best = std::min(best, d(small[0], large[1]));
    return best;
  }
  return std::min(d(small[0], large[0]) + d(small[1], large[1]), d(small[0], large[1]) + d(small[1], large[0]));
}

double concordance(const std::vector<double>& s, const std::vector<bool>& l) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t k = 0; k < s.size(); ++k)
      if (l[i] && !l[k]) {
        den += 1.0;
        num += s[i] > s[k] ? 1.0 : s[i] == s[k] ? 0.5 : 0.0;
      }
  return num / den;
}

}  // namespace

TEST_CASE("ospa examples") {
  const auto grid = uniform_grid(0.0, 20.0, 100);
  const SigmoidParams a{2.0, 0.7, 9.0}, b{3.5, 0.4, 12.0};
  CHECK(ospa({{a}, grid}, {{a}, grid}) == 0.0);
  CHECK(ospa({{constant(2.0)}, grid}, {{constant(1.0)}, grid}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ospa({{a, b}, grid}, {{b}, grid}) == 0.0);
  CHECK(unmatched_curves({{a, b}, grid}, {{b}, grid}) == 1);
  CHECK(ospa({{a, b}, grid}, {{b, a}, grid}) == 0.0);
}

TEST_CASE("ospa errors") {
  const SigmoidParams a{2.0, 0.7, 9.0};
  CHECK_THROWS_AS(ospa({{a}, uniform_grid(0, 20, 100)}, {{a}, uniform_grid(0, 20, 50)}), std::invalid_argument);
  CHECK_THROWS_AS(ospa({{}, uniform_grid(0, 20, 10)}, {{a}, uniform_grid(0, 20, 10)}), std::invalid_argument);
  CHECK_THROWS_AS(uniform_grid(0, 1, 1), std::invalid_argument);
}

TEST_CASE("ospa agrees with an independent enumerator") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> a(0.5, 5), r(0.1, 2), c(0, 20);
  std::uniform_int_distribution<int> size(1, 2);
  const auto grid = uniform_grid(0.0, 20.0, 100);
  for (int draw = 0; draw < 300; ++draw) {
    std::vector<SigmoidParams> x(size(rng)), y(size(rng));
    for (auto& p : x) p = {a(rng), r(rng), c(rng)};
    for (auto& p : y) p = {a(rng), r(rng), c(rng)};
    const double v = ospa({x, grid}, {y, grid});
    CHECK(v == doctest::Approx(brute_ospa(x, y, grid)).epsilon(1e-12));
    CHECK(v >= 0.0);
    if (x.size() == y.size()) CHECK(v == doctest::Approx(ospa({y, grid}, {x, grid})).epsilon(1e-12));
  }
}

TEST_CASE("sigma_relative_error") {
  const std::vector<double> t{0.5, 2.0}, e{0.6, 2.0};
  const auto r = sigma_relative_error(t, e);
  CHECK(r[0] == doctest::Approx(0.2));
  CHECK(r[1] == 0.0);
  const std::vector<double> zero{0.0};
  CHECK_THROWS_AS(sigma_relative_error(zero, zero), std::invalid_argument);
  CHECK_THROWS_AS(sigma_relative_error(t, zero), std::invalid_argument);
}

TEST_CASE("roc_auc examples") {
  const std::vector<bool> l{false, false, true, true};
  CHECK(roc_auc(std::vector<double>{0.1, 0.2, 0.8, 0.9}, l).auc == 1.0);
  CHECK(roc_auc(std::vector<double>{0.3, 0.3, 0.3, 0.3}, l).auc == 0.5);
  const auto r = roc_auc(std::vector<double>{0.1, 0.4, 0.35, 0.8}, l);
  CHECK(r.auc == doctest::Approx(0.75));
  CHECK(r.fpr.front() == 0.0);
  CHECK(r.tpr.front() == 0.0);
  CHECK(r.fpr.back() == 1.0);
  CHECK(r.tpr.back() == 1.0);
  CHECK(r.thresholds.size() + 1 == r.fpr.size());
  CHECK_THROWS_AS(roc_auc(std::vector<double>{0.1, 0.2}, {true, true}), std::invalid_argument);
}

TEST_CASE("roc_auc equals the concordant-pair probability and ignores monotone transforms") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> level(0, 9);
  std::bernoulli_distribution coin(0.4);
  for (int draw = 0; draw < 100; ++draw) {
    std::vector<double> s(30);
    std::vector<bool> l(30);
    for (std::size_t i = 0; i < 30; ++i) {
      s[i] = level(rng) / 10.0;
      l[i] = coin(rng);
    }
    l[0] = true;
    l[1] = false;
    const auto r = roc_auc(s, l);
    CHECK(r.auc == doctest::Approx(concordance(s, l)).epsilon(1e-12));
    std::vector<double> t(s);
    for (auto& v : t) v = std::exp(3.0 * v) - 7.0;
    CHECK(roc_auc(t, l).auc == doctest::Approx(r.auc).epsilon(1e-12));
    for (std::size_t i = 1; i < r.fpr.size(); ++i) {
      CHECK(r.fpr[i] >= r.fpr[i - 1]);
      CHECK(r.tpr[i] >= r.tpr[i - 1]);
    }
  }
}

TEST_CASE("align_memberships picks the better global labelling") {
  const std::vector<double> pi{0.9, 0.8, 0.2, 0.3};
  const auto direct = align_memberships(pi, {true, true, false, false});
  CHECK_FALSE(direct.swapped);
  CHECK(direct.accuracy == 1.0);
  const auto swapped = align_memberships(pi, {false, false, true, true});
  CHECK(swapped.swapped);
  CHECK(swapped.accuracy == 1.0);
  CHECK(swapped.aligned[0] == doctest::Approx(0.1));
}

TEST_CASE("subdivision_table examples") {
  SUBCASE("everyone in sub-population 1") {
    const std::vector<double> pi(6, 1.0);
    const auto t = subdivision_table(pi, {"TD", "PIGD", "TD", "Intermediate", "PIGD", "TD"});
    REQUIRE(t.rows.size() == 3);
    for (const auto& row : t.rows) {
      CHECK(row.sub1 == 1.0);
      CHECK(row.sub2 == 0.0);
    }
    CHECK(t.share1 == 1.0);
    CHECK(t.share2 == 0.0);
    CHECK(t.rows[0].condition == "Intermediate");
    CHECK(t.rows[2].condition == "TD");
    CHECK(t.rows[2].count == 3);
  }
  SUBCASE("balanced random assignment") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> pi(10000);
    std::vector<std::string> labels(10000);
    const char* names[] = {"TD", "PIGD", "Intermediate"};
    for (std::size_t j = 0; j < pi.size(); ++j) {
      pi[j] = u(rng);
      labels[j] = names[j % 3];
    }
    const auto t = subdivision_table(pi, labels);
    for (const auto& row : t.rows) {
      CHECK(std::abs(row.sub1 - 0.5) <= 0.05);
      CHECK(row.sub1 + row.sub2 == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  SUBCASE("threshold is inclusive") {
    const auto t = subdivision_table(std::vector<double>{0.5, 0.49}, {"a", "a"});
    CHECK(t.rows[0].sub1 == 0.5);
  }
}

TEST_CASE("evaluate_fit scores the generating state as near perfect") {
  SyntheticConfig cfg;
  cfg.n_biomarkers = 5;
  cfg.rng_seed = 4;
  const auto ds = generate_dataset(cfg);
  const auto st = dpmost::testing::truth_state(ds.truth, 0.05, 0.95, 0.9, 0.1);
  const auto ev = evaluate_fit(st, ds.truth);
  CHECK(ev.ospa_mean == 0.0);
  for (auto u : ev.unmatched) CHECK(u == 0);
  CHECK(ev.sigma_error_mean == 0.0);
  CHECK(ev.assignment_accuracy == 1.0);
  CHECK_FALSE(ev.labels_swapped);
  CHECK(roc_auc(ev.split_scores, ev.split_flags).auc == 1.0);

  const auto swapped = evaluate_fit(st.label_swapped(), ds.truth);
  CHECK(swapped.labels_swapped);
  CHECK(swapped.assignment_accuracy == 1.0);
  CHECK(swapped.ospa_mean == 0.0);
}

TEST_CASE("estimated_curves follows the split confidence") {
  const auto grid = uniform_grid(0, 20, 100);
  ModelState st = dpmost::testing::uniform_state(1, 2, {2.0, 1.0, 5.0}, 1.0);
  st.xi[0] = 0.4;
  CHECK(estimated_curves(st, 0, grid).curves.size() == 2);
  st.xi[0] = 0.5;
  CHECK(estimated_curves(st, 0, grid).curves.size() == 1);
}
