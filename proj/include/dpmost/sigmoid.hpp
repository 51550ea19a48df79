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

#include <cmath>

namespace dpmost {

/// Increasing logistic trajectory f(t) = supremum / (1 + exp(-growth_rate * (t - midpoint))).
///
/// supremum and growth_rate must be positive; midpoint is on the disease time axis.
struct SigmoidParams {
  double supremum = 1.0;
  double growth_rate = 1.0;
  double midpoint = 0.0;

  bool valid() const noexcept {
    return std::isfinite(supremum) && std::isfinite(growth_rate) &&
           std::isfinite(midpoint) && supremum > 0.0 && growth_rate > 0.0;
  }

  friend bool operator==(const SigmoidParams&, const SigmoidParams&) = default;
};

// Logistic factor 1/(1+exp(-z)) evaluated without overflow on either tail.
inline double logistic(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline double sigmoid_eval(const SigmoidParams& p, double t) noexcept {
  return p.supremum * logistic(p.growth_rate * (t - p.midpoint));
}

}  // namespace dpmost
