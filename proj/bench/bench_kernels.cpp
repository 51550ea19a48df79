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

// Parallel log-space kernels against the serial reference.

#include <benchmark/benchmark.h>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "dpmost/em.hpp"
#include "dpmost/reference.hpp"
#include "dpmost/synthetic.hpp"

namespace {

using namespace dpmost;

struct Problem {
  SyntheticDataset ds;
  Hyperparameters hyper;
  UnitIndex index;
  ModelState state;
};

Problem make_problem(std::size_t n_subjects, std::size_t n_biomarkers) {
  SyntheticConfig cfg;
  cfg.n_subjects = n_subjects;
  cfg.n_biomarkers = n_biomarkers;
  cfg.points_per_subject = 3;
  cfg.rng_seed = 1;
  Problem p{generate_dataset(cfg), Hyperparameters::defaults_for(n_subjects), {}, {}};
  p.index = build_unit_index(p.ds.data, p.hyper.granularity);
  p.state = initial_state(p.index, 2);
  return p;
}

void set_threads(benchmark::State& st) {
#ifdef _OPENMP
  omp_set_num_threads(static_cast<int>(st.range(2)));
#else
  if (st.range(2) != 1) st.SkipWithError("built without OpenMP");
#endif
}

void BM_LogLikelihoodParallel(benchmark::State& st) {
  set_threads(st);
  const auto p = make_problem(static_cast<std::size_t>(st.range(0)), static_cast<std::size_t>(st.range(1)));
  for (auto _ : st) benchmark::DoNotOptimize(log_likelihood(p.index, p.state));
}

void BM_LogLikelihoodReference(benchmark::State& st) {
  const auto p = make_problem(static_cast<std::size_t>(st.range(0)), static_cast<std::size_t>(st.range(1)));
  for (auto _ : st) benchmark::DoNotOptimize(reference::log_likelihood(p.ds.data, p.state, p.hyper));
}

void BM_EStepParallel(benchmark::State& st) {
  set_threads(st);
  const auto p = make_problem(static_cast<std::size_t>(st.range(0)), static_cast<std::size_t>(st.range(1)));
  for (auto _ : st) benchmark::DoNotOptimize(e_step(p.index, p.state));
}

void BM_EStepReference(benchmark::State& st) {
  const auto p = make_problem(static_cast<std::size_t>(st.range(0)), static_cast<std::size_t>(st.range(1)));
  for (auto _ : st) benchmark::DoNotOptimize(reference::e_step(p.ds.data, p.state, p.hyper));
}

void BM_Fit(benchmark::State& st) {
  set_threads(st);
  const auto p = make_problem(static_cast<std::size_t>(st.range(0)), static_cast<std::size_t>(st.range(1)));
  FitConfig fc;
  fc.restarts = 4;
  fc.rng_seed = 3;
  for (auto _ : st) benchmark::DoNotOptimize(fit(p.ds.data, p.hyper, fc));
}

// Arguments: subjects, biomarkers, threads (ignored by the serial reference).
void kernel_sizes(benchmark::internal::Benchmark* b) {
  for (long j : {100, 1000, 10000})
    for (long threads : {1, 2, 4}) b->Args({j, 5, threads});
}

void reference_sizes(benchmark::internal::Benchmark* b) {
  for (long j : {100, 1000, 10000}) b->Args({j, 5, 1});
}

}  // namespace

BENCHMARK(BM_LogLikelihoodParallel)->Apply(kernel_sizes)->UseRealTime();
BENCHMARK(BM_LogLikelihoodReference)->Apply(reference_sizes);
BENCHMARK(BM_EStepParallel)->Apply(kernel_sizes)->UseRealTime();
BENCHMARK(BM_EStepReference)->Apply(reference_sizes);
BENCHMARK(BM_Fit)->Args({100, 5, 1})->Args({100, 5, 2})->Args({100, 5, 4})->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
