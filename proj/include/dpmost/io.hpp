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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dpmost/benchmark.hpp"
#include "dpmost/em.hpp"
#include "dpmost/synthetic.hpp"
#include "dpmost/timeshift.hpp"

namespace dpmost::io {

inline constexpr int kModelFormatVersion = 1;

struct CohortReadOptions {
  // When non-empty, only these columns are biomarkers, in this order; any
  // other column is rejected unless ignore_unknown_columns is set.
  std::vector<std::string> biomarkers;
  bool ignore_unknown_columns = false;
};

// Wide CSV: subject_id,time,<biomarker>...[,label]. Empty cell = missing.
CohortData read_cohort(std::istream& in, const CohortReadOptions& options = {});
CohortData load_cohort(const std::filesystem::path& path, const CohortReadOptions& options = {});
void write_cohort(std::ostream& out, const CohortData& data);
void save_cohort(const std::filesystem::path& path, const CohortData& data);

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

struct ModelFile {
  FittedModel model;
  Hyperparameters hyper;
  std::vector<std::string> biomarker_names;
  std::vector<std::string> subject_ids;
  std::vector<double> shifts;  // one per subject
  std::uint64_t seed = 0;
  int restarts = 1;

  friend bool operator==(const ModelFile&, const ModelFile&) = default;
};

nlohmann::json to_json(const ModelFile& model);
ModelFile model_from_json(const nlohmann::json& j);
void save_model(const std::filesystem::path& path, const ModelFile& model);
ModelFile load_model(const std::filesystem::path& path);

nlohmann::json to_json(const GroundTruth& truth, const std::vector<std::string>& subject_ids);
GroundTruth truth_from_json(const nlohmann::json& j);
void save_truth(const std::filesystem::path& path, const GroundTruth& truth,
                const std::vector<std::string>& subject_ids);
GroundTruth load_truth(const std::filesystem::path& path);

nlohmann::json to_json(const SigmoidParams& p);
SigmoidParams sigmoid_from_json(const nlohmann::json& j);

// Config files. Unknown keys are rejected.
SyntheticConfig synthetic_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SyntheticConfig& c);
nlohmann::json to_json(const Hyperparameters& h);
Hyperparameters hyperparameters_from_json(const nlohmann::json& j, Hyperparameters base = {});
FitConfig fit_config_from_json(const nlohmann::json& j, FitConfig base = {});
BenchmarkGrid benchmark_grid_from_json(const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

// Long-format plot tables.
void write_trajectories_csv(std::ostream& out, const ModelState& state,
                            const std::vector<std::string>& biomarker_names, double lo,
                            double hi, std::size_t n_points);
void write_true_trajectories_csv(std::ostream& out, const GroundTruth& truth,
                                 const std::vector<std::string>& biomarker_names,
                                 std::size_t n_points);
void write_roc_csv(std::ostream& out, const std::string& key, const RocResult& roc,
                   bool header = true);
void write_evaluation_csv(std::ostream& out, const Evaluation& eval,
                          const std::vector<std::string>& biomarker_names);
void write_subdivision_csv(std::ostream& out, const SubdivisionTable& table);
void write_benchmark_csv(std::ostream& out, const BenchmarkReport& report,
                         const BenchmarkGrid& grid);
nlohmann::json benchmark_summary(const BenchmarkReport& report, int repetitions);

}  // namespace dpmost::io
