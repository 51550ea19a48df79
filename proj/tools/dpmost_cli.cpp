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

// Command-line driver: simulate, fit, evaluate, benchmark, tabulate.
//
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "dpmost/benchmark.hpp"
#include "dpmost/em.hpp"
#include "dpmost/error.hpp"
#include "dpmost/io.hpp"
#include "dpmost/metrics.hpp"
#include "dpmost/synthetic.hpp"
#include "dpmost/timeshift.hpp"

namespace fs = std::filesystem;
using namespace dpmost;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr std::size_t kPlotPoints = 200;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ofstream open_file(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  return out;
}

void write_json(const fs::path& path, const json& j) { open_file(path) << j.dump(2) << '\n'; }

// Disease-time range covered by the data after shifts.
std::pair<double, double> time_span(const CohortData& data) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t j = 0; j < data.n_subjects(); ++j)
    for (double t : data.subjects[j].times) {
      lo = std::min(lo, t + data.shift(j));
      hi = std::max(hi, t + data.shift(j));
    }
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  return {lo, hi};
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string config, out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> subjects, biomarkers, points;
  std::optional<std::string> snr;
  std::optional<double> noise;
};

int run_simulate(const SimulateArgs& a) {
  SyntheticConfig cfg;
  if (!a.config.empty()) cfg = io::synthetic_config_from_json(io::read_json(a.config));
  if (a.seed) cfg.rng_seed = *a.seed;
  if (a.subjects) cfg.n_subjects = *a.subjects;
  if (a.biomarkers) cfg.n_biomarkers = *a.biomarkers;
  if (a.points) cfg.points_per_subject = *a.points;
  if (a.noise) cfg.noise_std = *a.noise;
  try {
    if (a.snr) cfg.snr_level = snr_from_string(*a.snr);
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  const auto ds = generate_dataset(cfg);
  const fs::path dir = a.out;
  fs::create_directories(dir);
  io::save_cohort(dir / "cohort.csv", ds.data);
  std::vector<std::string> ids;
  for (const auto& s : ds.data.subjects) ids.push_back(s.subject_id);
  io::save_truth(dir / "truth.json", ds.truth, ids);
  write_json(dir / "config.json", io::to_json(cfg));
  auto traj = open_file(dir / "true_trajectories.csv");
  io::write_true_trajectories_csv(traj, ds.truth, ds.data.biomarker_names, kPlotPoints);
  std::cout << "wrote " << ds.data.n_subjects() << " subjects, " << ds.data.n_observations()
            << " observations to " << dir.string() << '\n';
  return kExitOk;
}

// --------------------------------------------------------------------- fit

struct FitArgs {
  std::string data, out, config;
  std::optional<double> beta, beta_noise, tolerance;
  std::optional<int> restarts, max_iterations;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> granularity;
  bool estimate_shifts = false;
  double shift_window = 10.0;
  double shift_step = 0.1;
  int rounds = 3;
  int align_iterations = kDefaultAlignIterations;
};

int run_fit(const FitArgs& a) {
  CohortData data = io::load_cohort(a.data);

  Hyperparameters hyper = Hyperparameters::defaults_for(data.n_subjects());
  FitConfig fc;
  if (!a.config.empty()) {
    const json j = io::read_json(a.config);
    if (!j.is_object()) throw DataError("fit config must be a JSON object");
    for (const auto& [key, value] : j.items())
      if (key != "fit" && key != "hyperparameters") throw DataError("unknown key '" + key + "' in fit config");
    if (j.contains("fit")) fc = io::fit_config_from_json(j.at("fit"));
    if (j.contains("hyperparameters")) hyper = io::hyperparameters_from_json(j.at("hyperparameters"), hyper);
  }
  if (a.granularity) {
    try {
      hyper.granularity = granularity_from_string(*a.granularity);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  if (a.beta) hyper.beta = *a.beta;
  if (a.beta_noise) hyper.beta_noise = *a.beta_noise;
  if (a.restarts) fc.restarts = *a.restarts;
  if (a.max_iterations) fc.max_iterations = *a.max_iterations;
  if (a.tolerance) fc.tolerance = *a.tolerance;
  if (a.seed) fc.rng_seed = *a.seed;
  try {
    hyper.validate();
    fc.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  io::ModelFile m;
  m.hyper = hyper;
  m.biomarker_names = data.biomarker_names;
  for (const auto& s : data.subjects) m.subject_ids.push_back(s.subject_id);
  m.seed = fc.rng_seed;
  m.restarts = fc.restarts;
  if (a.estimate_shifts) {
    auto res = alternate_fit(data, hyper, fc, a.rounds, -a.shift_window, a.shift_window,
                             a.shift_step, a.align_iterations);
    m.model = std::move(res.model);
    m.shifts = res.shifts.shifts;
  } else {
    m.model = fit(data, hyper, fc);
    m.shifts.assign(data.n_subjects(), 0.0);
    for (std::size_t j = 0; j < data.n_subjects(); ++j) m.shifts[j] = data.shift(j);
  }
  data.time_shifts = m.shifts;

  const fs::path out = a.out;
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  io::save_model(out, m);
  const auto [lo, hi] = time_span(data);
  fs::path traj_path = out;
  traj_path.replace_filename(out.stem().string() + "_trajectories.csv");
  auto traj = open_file(traj_path);
  io::write_trajectories_csv(traj, m.model.state, m.biomarker_names, lo, hi, kPlotPoints);

  std::cout << "objective " << io::format_double(m.model.objective()) << " after "
            << m.model.iterations() << " iterations (" << (m.model.converged ? "converged" : "not converged")
            << ", restart " << m.model.restart_index << ")\n";
  for (std::size_t b = 0; b < m.biomarker_names.size(); ++b)
    std::cout << "  " << m.biomarker_names[b] << ": split confidence "
              << io::format_double(m.model.state.split_confidence(b)) << ", sigma "
              << io::format_double(m.model.state.sigma[b]) << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string model, truth, out;
};

int run_evaluate(const EvaluateArgs& a) {
  const io::ModelFile m = io::load_model(a.model);
  const json tj = io::read_json(a.truth);
  const GroundTruth truth = io::truth_from_json(tj);
  if (truth.true_curves.size() != m.model.state.n_biomarkers() ||
      truth.subject_population.size() != m.model.state.n_subjects())
    throw DataError("model and ground truth have different dimensions");
  for (std::size_t j = 0; j < m.subject_ids.size(); ++j)
    if (tj.at("subjects").at(j).at("id").get<std::string>() != m.subject_ids[j])
      throw DataError("model and ground truth list subjects in a different order");

  Evaluation ev;
  try {
    ev = evaluate_fit(m.model.state, truth);
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }

  const fs::path dir = a.out;
  fs::create_directories(dir);
  {
    auto f = open_file(dir / "evaluation.csv");
    io::write_evaluation_csv(f, ev, m.biomarker_names);
  }
  {
    auto f = open_file(dir / "roc.csv");
    bool header = true;
    auto emit = [&](const std::string& key, std::span<const double> s, const std::vector<bool>& l) {
      if (std::count(l.begin(), l.end(), true) == 0 || std::count(l.begin(), l.end(), false) == 0) return;
      io::write_roc_csv(f, key, roc_auc(s, l), header);
      header = false;
    };
    emit("xi", ev.split_scores, ev.split_flags);
    emit("pi", ev.membership_scores, ev.in_sub1);
    if (header) f << "key,threshold,fpr,tpr\n";
  }
  {
    auto f = open_file(dir / "trajectories.csv");
    io::write_trajectories_csv(f, m.model.state, m.biomarker_names, truth.time_lo, truth.time_hi, kPlotPoints);
  }
  {
    auto f = open_file(dir / "true_trajectories.csv");
    io::write_true_trajectories_csv(f, truth, m.biomarker_names, kPlotPoints);
  }
  std::cout << "ospa " << io::format_double(ev.ospa_mean) << ", sigma relative error "
            << io::format_double(ev.sigma_error_mean) << ", assignment accuracy "
            << io::format_double(ev.assignment_accuracy) << '\n';
  return kExitOk;
}

// --------------------------------------------------------------- benchmark

struct BenchmarkArgs {
  std::string grid, out;
  int reps = 100;
  std::optional<std::uint64_t> seed;
};

int run_bench(const BenchmarkArgs& a) {
  BenchmarkGrid grid;
  grid.fit.restarts = 3;
  if (!a.grid.empty()) grid = io::benchmark_grid_from_json(io::read_json(a.grid));
  if (a.seed) grid.seed = *a.seed;
  const auto report = run_benchmark(grid, a.reps);

  const fs::path dir = a.out;
  fs::create_directories(dir);
  {
    auto f = open_file(dir / "benchmark.csv");
    io::write_benchmark_csv(f, report, grid);
  }
  {
    auto f = open_file(dir / "roc.csv");
    f << "key,threshold,fpr,tpr\n";
    for (const auto& c : report.cells) {
      const std::string cell = "B" + std::to_string(c.n_biomarkers) + "_" + std::string(to_string(c.snr));
      if (c.roc_xi) io::write_roc_csv(f, cell + "_xi", *c.roc_xi, false);
      if (c.roc_pi) io::write_roc_csv(f, cell + "_pi", *c.roc_pi, false);
    }
  }
  write_json(dir / "summary.json", io::benchmark_summary(report, a.reps));
  for (const auto& c : report.cells)
    std::cout << "B=" << c.n_biomarkers << " snr=" << to_string(c.snr) << ": median ospa "
              << io::format_double(c.median_ospa) << ", median sigma error "
              << io::format_double(c.median_sigma_error) << ", " << c.n_failed << " failed"
              << (c.flagged ? " (flagged)" : "") << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- tabulate

struct TabulateArgs {
  std::string model, data, out;
  double threshold = 0.5;
};

int run_tabulate(const TabulateArgs& a) {
  const io::ModelFile m = io::load_model(a.model);
  const CohortData data = io::load_cohort(a.data);
  std::unordered_map<std::string, const SubjectSeries*> by_id;
  for (const auto& s : data.subjects) by_id.emplace(s.subject_id, &s);
  std::vector<std::string> labels;
  for (const auto& id : m.subject_ids) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) throw DataError("subject '" + id + "' of the model is not in the data file");
    labels.push_back(it->second->label.empty() ? "unlabelled" : it->second->label);
  }
  const auto table = subdivision_table(m.model.state.pi, labels, a.threshold);
  auto f = open_file(a.out);
  io::write_subdivision_csv(f, table);
  io::write_subdivision_csv(std::cout, table);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixture of disease-progression sub-trajectories"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", "dpmost " DPMOST_VERSION);
  int threads = 0;
  app.add_option("--threads", threads, "Cap on worker threads (0 = runtime default)")
      ->check(CLI::NonNegativeNumber);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic cohort with known structure");
  simulate->add_option("--config", sim.config, "Synthetic config JSON")->check(CLI::ExistingFile);
  simulate->add_option("--out", sim.out, "Output directory")->required();
  simulate->add_option("--seed", sim.seed, "Overrides the config seed");
  simulate->add_option("--subjects", sim.subjects, "Number of subjects")->check(CLI::PositiveNumber);
  simulate->add_option("--biomarkers", sim.biomarkers, "Number of biomarkers")->check(CLI::PositiveNumber);
  simulate->add_option("--points", sim.points, "Visits per subject")->check(CLI::PositiveNumber);
  simulate->add_option("--snr", sim.snr, "low, normal or high");
  simulate->add_option("--noise", sim.noise, "Noise standard deviation")->check(CLI::NonNegativeNumber);

  FitArgs fa;
  auto* fitc = app.add_subcommand("fit", "MAP fit of the sub-trajectory mixture");
  fitc->add_option("--data", fa.data, "Cohort CSV")->required()->check(CLI::ExistingFile);
  fitc->add_option("--out", fa.out, "Model JSON to write")->required();
  fitc->add_option("--config", fa.config, "JSON with optional 'fit' and 'hyperparameters' objects")
      ->check(CLI::ExistingFile);
  fitc->add_option("--beta", fa.beta, "Prior weight on the shared trajectory (default 0.15 J)")
      ->check(CLI::NonNegativeNumber);
  fitc->add_option("--beta-noise", fa.beta_noise, "Noise prior parameter, > 1 (default 0.15 J)");
  fitc->add_option("--restarts", fa.restarts, "Random restarts")->check(CLI::PositiveNumber);
  fitc->add_option("--max-iterations", fa.max_iterations, "EM iteration cap")->check(CLI::PositiveNumber);
  fitc->add_option("--tolerance", fa.tolerance, "Relative objective change for convergence")
      ->check(CLI::PositiveNumber);
  fitc->add_option("--seed", fa.seed, "Random seed");
  fitc->add_option("--granularity", fa.granularity, "Responsibility unit (default subject)")
      ->check(CLI::IsMember({"subject", "observation"}));
  auto* est = fitc->add_flag("--estimate-shifts", fa.estimate_shifts, "Alternate fits with time-shift estimation");
  fitc->add_option("--shift-window", fa.shift_window, "Shifts are searched in [-w, w]")
      ->check(CLI::PositiveNumber)
      ->needs(est);
  fitc->add_option("--shift-step", fa.shift_step, "Shift grid step")->check(CLI::PositiveNumber)->needs(est);
  fitc->add_option("--rounds", fa.rounds, "Fit / shift rounds")->check(CLI::PositiveNumber)->needs(est);
  fitc->add_option("--align-iterations", fa.align_iterations,
                   "Single-curve alignment passes before the rounds (0 disables)")
      ->check(CLI::NonNegativeNumber)
      ->needs(est);

  EvaluateArgs ea;
  auto* evaluate = app.add_subcommand("evaluate", "Score a fitted model against ground truth");
  evaluate->add_option("--model", ea.model, "Model JSON")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--truth", ea.truth, "Ground-truth JSON")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--out", ea.out, "Report directory")->required();

  BenchmarkArgs ba;
  auto* bench = app.add_subcommand("benchmark", "Repeated synthetic benchmark over a grid of cells");
  bench->add_option("--grid", ba.grid, "Benchmark grid JSON")->check(CLI::ExistingFile);
  bench->add_option("--reps", ba.reps, "Datasets per cell")->check(CLI::PositiveNumber);
  bench->add_option("--seed", ba.seed, "Overrides the grid seed");
  bench->add_option("--out", ba.out, "Output directory")->required();

  TabulateArgs ta;
  auto* tab = app.add_subcommand("tabulate", "Cross-tabulate sub-populations against the label column");
  tab->add_option("--model", ta.model, "Model JSON")->required()->check(CLI::ExistingFile);
  tab->add_option("--data", ta.data, "Cohort CSV with a label column")->required()->check(CLI::ExistingFile);
  tab->add_option("--out", ta.out, "CSV to write")->required();
  tab->add_option("--threshold", ta.threshold, "Sub-population 1 iff pi >= threshold")
      ->check(CLI::Range(0.0, 1.0));

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#endif

  try {
    if (*simulate) return run_simulate(sim);
    if (*fitc) return run_fit(fa);
    if (*evaluate) return run_evaluate(ea);
    if (*bench) return run_bench(ba);
    if (*tab) return run_tabulate(ta);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const FitError& e) {
    std::cerr << "fit error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
