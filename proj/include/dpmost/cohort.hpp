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
#include <optional>
#include <string>
#include <vector>

namespace dpmost {

/// Longitudinal observations for one subject.
///
/// `values[b][l]` is biomarker b at visit `times[l]`; a missing measurement is
/// an empty optional. `times` are visit times before any time shift.
struct SubjectSeries {
  std::string subject_id;
  std::vector<double> times;
  std::vector<std::vector<std::optional<double>>> values;
  // Clinical label at the last visit; empty when the cohort carries none.
  std::string label;

  friend bool operator==(const SubjectSeries&, const SubjectSeries&) = default;
};

struct CohortData {
  std::vector<SubjectSeries> subjects;
  std::vector<std::string> biomarker_names;
  // Per-subject translation onto the disease axis. Empty means all zero.
  std::vector<double> time_shifts;

  std::size_t n_subjects() const noexcept { return subjects.size(); }
  std::size_t n_biomarkers() const noexcept { return biomarker_names.size(); }
  double shift(std::size_t j) const noexcept {
    return time_shifts.empty() ? 0.0 : time_shifts[j];
  }
  std::size_t n_observations() const noexcept;

  // Throws DataError if any structural invariant is violated.
  void validate() const;

  friend bool operator==(const CohortData&, const CohortData&) = default;
};

}  // namespace dpmost
