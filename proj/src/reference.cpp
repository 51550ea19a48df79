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

#include "dpmost/reference.hpp"

#include <cmath>
#include <numbers>

namespace dpmost::reference {
namespace {

double normal_pdf(double x, double mean, double sigma) {
  const double z = (x - mean) / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

// Product of point densities over the visits [first, last) of one subject.
double series_density(const SubjectSeries& s, std::size_t b, std::size_t first,
                      std::size_t last, double shift, const SigmoidParams& p, double sigma,
                      bool& any) {
  double density = 1.0;
  for (std::size_t l = first; l < last; ++l) {
    if (!s.values[b][l]) continue;
    any = true;
    density *= normal_pdf(*s.values[b][l], sigmoid_eval(p, s.times[l] + shift), sigma);
  }
  return density;
}

template <typename Visit>
void for_each_unit(const CohortData& data, const Hyperparameters& hyper, Visit&& visit) {
  for (std::size_t b = 0; b < data.n_biomarkers(); ++b) {
    std::size_t u = 0;
    for (std::size_t j = 0; j < data.n_subjects(); ++j) {
      const auto& s = data.subjects[j];
      if (hyper.granularity == Granularity::kSubject) {
        visit(b, u++, j, 0, s.times.size());
      } else {
        for (std::size_t l = 0; l < s.times.size(); ++l) visit(b, u++, j, l, l + 1);
      }
    }
  }
}

}  // namespace

double log_likelihood(const CohortData& data, const ModelState& state,
                      const Hyperparameters& hyper) {
  state.check_dimensions(data);
  double total = 0.0;
  for_each_unit(data, hyper, [&](std::size_t b, std::size_t, std::size_t j, std::size_t first,
                                 std::size_t last) {
    const auto& s = data.subjects[j];
    bool any = false;
    const double shift = data.shift(j);
    const double l0 = series_density(s, b, first, last, shift, state.shared[b], state.sigma[b], any);
    const double l1 = series_density(s, b, first, last, shift, state.sub1[b], state.sigma[b], any);
    const double l2 = series_density(s, b, first, last, shift, state.sub2[b], state.sigma[b], any);
    if (!any) return;
    const double xi = state.xi[b];
    const double pi = state.pi[j];
    total += std::log(xi * l0 + (1.0 - xi) * (pi * l1 + (1.0 - pi) * l2));
  });
  return total;
}

ResponsibilityTensor e_step(const CohortData& data, const ModelState& state,
                            const Hyperparameters& hyper) {
  state.check_dimensions(data);
  ResponsibilityTensor r;
  r.n_biomarkers = data.n_biomarkers();
  for (std::size_t j = 0; j < data.n_subjects(); ++j) {
    const std::size_t k = hyper.granularity == Granularity::kSubject ? 1 : data.subjects[j].times.size();
    r.unit_subject.insert(r.unit_subject.end(), k, j);
  }
  r.n_units = r.unit_subject.size();
  r.gamma.resize(r.n_biomarkers * r.n_units);
  r.has_data.resize(r.gamma.size());
  for_each_unit(data, hyper, [&](std::size_t b, std::size_t u, std::size_t j, std::size_t first,
                                 std::size_t last) {
    const auto& s = data.subjects[j];
    bool any = false;
    const double shift = data.shift(j);
    const double xi = state.xi[b];
    const double pi = state.pi[j];
    double w0 = xi;
    double w1 = (1.0 - xi) * pi;
    double w2 = (1.0 - xi) * (1.0 - pi);
    w0 *= series_density(s, b, first, last, shift, state.shared[b], state.sigma[b], any);
    w1 *= series_density(s, b, first, last, shift, state.sub1[b], state.sigma[b], any);
    w2 *= series_density(s, b, first, last, shift, state.sub2[b], state.sigma[b], any);
    const double z = w0 + w1 + w2;
    r.gamma[b * r.n_units + u] = {w0 / z, w1 / z, w2 / z};
    r.has_data[b * r.n_units + u] = any;
  });
  return r;
}

}  // namespace dpmost::reference
