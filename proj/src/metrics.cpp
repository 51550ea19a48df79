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

#include "dpmost/metrics.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace dpmost {

std::vector<double> uniform_grid(double lo, double hi, std::size_t n) {
  if (n < 2) throw std::invalid_argument("grid needs at least two points");
  std::vector<double> grid(n);
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) grid[i] = lo + step * static_cast<double>(i);
  grid.back() = hi;
  return grid;
}

namespace {

double pair_mse(const SigmoidParams& a, const SigmoidParams& b, std::span<const double> grid) {
  double total = 0.0;
  for (double t : grid) {
    const double d = sigmoid_eval(a, t) - sigmoid_eval(b, t);
    total += d * d;
  }
  return total / static_cast<double>(grid.size());
}

}  // namespace

double ospa(const CurveSet& truth, const CurveSet& estimate) {
  if (truth.eval_grid != estimate.eval_grid) throw std::invalid_argument("ospa: curve sets use different grids");
  if (truth.eval_grid.size() < 2) throw std::invalid_argument("ospa: grid needs at least two points");
  if (truth.curves.empty() || estimate.curves.empty())
    throw std::invalid_argument("ospa: curve sets must be non-empty");
  const bool estimate_smaller = estimate.curves.size() <= truth.curves.size();
  const auto& small = estimate_smaller ? estimate.curves : truth.curves;
  const auto& large = estimate_smaller ? truth.curves : estimate.curves;

  std::vector<std::size_t> perm(large.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (std::size_t i = 0; i < small.size(); ++i) cost += pair_mse(small[i], large[perm[i]], truth.eval_grid);
    best = std::min(best, cost);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

std::vector<double> sigma_relative_error(std::span<const double> true_sigma,
                                         std::span<const double> est_sigma) {
  if (true_sigma.size() != est_sigma.size())
    throw std::invalid_argument("sigma_relative_error: length mismatch");
  std::vector<double> out(true_sigma.size());
  for (std::size_t b = 0; b < out.size(); ++b) {
    if (!(true_sigma[b] > 0.0)) throw std::invalid_argument("sigma_relative_error: true sigma must be > 0");
    out[b] = std::abs(est_sigma[b] - true_sigma[b]) / true_sigma[b];
  }
  return out;
}

RocResult roc_auc(std::span<const double> scores, const std::vector<bool>& labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("roc_auc: length mismatch");
  const auto n_pos = static_cast<double>(std::count(labels.begin(), labels.end(), true));
  const auto n_neg = static_cast<double>(labels.size()) - n_pos;
  if (n_pos == 0.0 || n_neg == 0.0) throw std::invalid_argument("roc_auc: labels contain a single class");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  RocResult roc;
  roc.fpr.push_back(0.0);
  roc.tpr.push_back(0.0);
  double tp = 0.0, fp = 0.0, area = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    const double threshold = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == threshold; ++i) (labels[order[i]] ? tp : fp) += 1.0;
    const double fpr = fp / n_neg;
    const double tpr = tp / n_pos;
    area += (fpr - roc.fpr.back()) * (tpr + roc.tpr.back()) / 2.0;
    roc.thresholds.push_back(threshold);
    roc.fpr.push_back(fpr);
    roc.tpr.push_back(tpr);
  }
  roc.auc = area;
  return roc;
}

LabelAlignment align_memberships(std::span<const double> pi, const std::vector<bool>& in_sub1) {
  if (pi.size() != in_sub1.size()) throw std::invalid_argument("align_memberships: length mismatch");
  std::size_t direct = 0, swapped = 0;
  for (std::size_t j = 0; j < pi.size(); ++j) {
    direct += (pi[j] >= 0.5) == in_sub1[j];
    swapped += (1.0 - pi[j] >= 0.5) == in_sub1[j];
  }
  LabelAlignment out;
  out.swapped = swapped > direct;
  const double n = static_cast<double>(std::max<std::size_t>(pi.size(), 1));
  out.accuracy = static_cast<double>(out.swapped ? swapped : direct) / n;
  out.aligned.assign(pi.begin(), pi.end());
  if (out.swapped)
    for (double& p : out.aligned) p = 1.0 - p;
  return out;
}

SubdivisionTable subdivision_table(std::span<const double> pi,
                                   const std::vector<std::string>& labels, double threshold) {
  if (pi.size() != labels.size()) throw std::invalid_argument("subdivision_table: length mismatch");
  std::map<std::string, std::pair<std::size_t, std::size_t>> counts;
  std::size_t total1 = 0;
  for (std::size_t j = 0; j < pi.size(); ++j) {
    auto& c = counts[labels[j]];
    if (pi[j] >= threshold) {
      ++c.first;
      ++total1;
    } else {
      ++c.second;
    }
  }
  SubdivisionTable table;
  table.n_subjects = pi.size();
  for (const auto& [condition, c] : counts) {
    const std::size_t n = c.first + c.second;
    table.rows.push_back({condition, n, static_cast<double>(c.first) / static_cast<double>(n),
                          static_cast<double>(c.second) / static_cast<double>(n)});
  }
  if (!pi.empty()) {
    table.share1 = static_cast<double>(total1) / static_cast<double>(pi.size());
    table.share2 = static_cast<double>(pi.size() - total1) / static_cast<double>(pi.size());
    table.n_sub1 = total1;
  }
  return table;
}

}  // namespace dpmost
