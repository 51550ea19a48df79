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
#include <span>
#include <string>
#include <vector>

#include "dpmost/sigmoid.hpp"

namespace dpmost {

struct CurveSet {
  std::vector<SigmoidParams> curves;
  std::vector<double> eval_grid;
};

std::vector<double> uniform_grid(double lo, double hi, std::size_t n);

// Minimum over injective matchings between the two sets of the summed
// per-pair grid MSE. Unmatched curves carry no penalty.
double ospa(const CurveSet& truth, const CurveSet& estimate);

inline std::size_t unmatched_curves(const CurveSet& truth, const CurveSet& estimate) {
  const auto d = truth.curves.size();
  const auto e = estimate.curves.size();
  return d > e ? d - e : e - d;
}

std::vector<double> sigma_relative_error(std::span<const double> true_sigma,
                                         std::span<const double> est_sigma);

struct RocResult {
  std::vector<double> thresholds;  // thresholds[i] yields (fpr[i+1], tpr[i+1])
  std::vector<double> fpr;         // starts at 0, ends at 1
  std::vector<double> tpr;
  double auc = 0.5;
};

RocResult roc_auc(std::span<const double> scores, const std::vector<bool>& labels);

struct LabelAlignment {
  bool swapped = false;
  double accuracy = 0.0;
  std::vector<double> aligned;  // membership in the true population 1
};

// Picks the global relabelling maximizing threshold-0.5 accuracy.
LabelAlignment align_memberships(std::span<const double> pi, const std::vector<bool>& in_sub1);

struct SubdivisionRow {
  std::string condition;
  std::size_t count = 0;
  double sub1 = 0.0;
  double sub2 = 0.0;
};

struct SubdivisionTable {
  std::vector<SubdivisionRow> rows;  // sorted by condition
  double share1 = 0.0;
  double share2 = 0.0;
  std::size_t n_subjects = 0;
  std::size_t n_sub1 = 0;
};

// Subjects go to sub-population 1 iff pi >= threshold.
SubdivisionTable subdivision_table(std::span<const double> pi,
                                   const std::vector<std::string>& labels,
                                   double threshold = 0.5);

}  // namespace dpmost
