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

#include "dpmost/cohort.hpp"

#include <cmath>
#include <unordered_set>

#include "dpmost/error.hpp"

namespace dpmost {

std::size_t CohortData::n_observations() const noexcept {
  std::size_t n = 0;
  for (const auto& s : subjects)
    for (const auto& column : s.values)
      for (const auto& v : column) n += v.has_value();
  return n;
}

void CohortData::validate() const {
  const std::size_t n_b = n_biomarkers();
  if (n_b == 0) throw DataError("cohort has no biomarkers");
  if (!time_shifts.empty() && time_shifts.size() != subjects.size())
    throw DataError("time_shifts has " + std::to_string(time_shifts.size()) +
                    " entries for " + std::to_string(subjects.size()) + " subjects");
  std::unordered_set<std::string> seen;
  for (const auto& s : subjects) {
    if (!seen.insert(s.subject_id).second)
      throw DataError("duplicate subject_id '" + s.subject_id + "'");
    if (s.values.size() != n_b)
      throw DataError("subject '" + s.subject_id + "' has " + std::to_string(s.values.size()) +
                      " biomarker columns, expected " + std::to_string(n_b));
    bool any = false;
    for (std::size_t l = 0; l < s.times.size(); ++l) {
      if (!std::isfinite(s.times[l]))
        throw DataError("subject '" + s.subject_id + "' has a non-finite time");
      if (l > 0 && s.times[l] < s.times[l - 1])
        throw DataError("subject '" + s.subject_id + "' has decreasing times");
    }
    for (const auto& column : s.values) {
      if (column.size() != s.times.size())
        throw DataError("subject '" + s.subject_id + "' has misaligned values");
      for (const auto& v : column) {
        if (v && !std::isfinite(*v))
          throw DataError("subject '" + s.subject_id + "' has a non-finite value");
        any = any || v.has_value();
      }
    }
    if (!any) throw DataError("subject '" + s.subject_id + "' has no observations");
  }
  for (double d : time_shifts)
    if (!std::isfinite(d)) throw DataError("non-finite time shift");
}

}  // namespace dpmost
