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

#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "doctest.h"
#include "dpmost/benchmark.hpp"
#include "dpmost/cohort.hpp"
#include "dpmost/em.hpp"
#include "dpmost/error.hpp"
#include "dpmost/io.hpp"
#include "dpmost/synthetic.hpp"

using namespace dpmost;
namespace fs = std::filesystem;

namespace {

CohortData parse(const std::string& text, const io::CohortReadOptions& opt = {}) {
  std::istringstream in(text);
  return io::read_cohort(in, opt);
}

std::size_t error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("dpmost_test_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

io::ModelFile fitted_model(std::uint64_t seed) {
  SyntheticConfig cfg;
  cfg.n_subjects = 40;
  cfg.n_biomarkers = 3;
  cfg.rng_seed = seed;
  const auto ds = generate_dataset(cfg);
  io::ModelFile m;
  m.hyper = Hyperparameters::defaults_for(40);
  FitConfig fc;
  fc.rng_seed = seed;
  fc.restarts = 2;
  m.model = fit(ds.data, m.hyper, fc);
  m.biomarker_names = ds.data.biomarker_names;
  for (const auto& s : ds.data.subjects) m.subject_ids.push_back(s.subject_id);
  m.shifts.assign(40, 0.0);
  m.seed = seed;
  m.restarts = 2;
  return m;
}

}  // namespace

TEST_CASE("read_cohort parses a small file with a missing cell") {
  const auto d = parse("subject_id,time,mA,mB\np1,0.5,1.0,2.0\np1,1.5,,2.5\np1,2.5,1.2,2.9\n");
  CHECK(d.n_subjects() == 1);
  CHECK(d.n_biomarkers() == 2);
  const auto& s = d.subjects[0];
  CHECK(s.times == std::vector<double>{0.5, 1.5, 2.5});
  CHECK_FALSE(s.values[0][1].has_value());
  CHECK(*s.values[1][1] == 2.5);
  CHECK(d.n_observations() == 5);
}

TEST_CASE("read_cohort groups by subject, sorts by time and keeps the last label") {
  const auto d = parse(
      "subject_id,time,m,label\n"
      "b,3,1,TD\n"
      "a,2,0.5,PIGD\n"
      "b,1,0.2,\n"
      "\"a\",1,0.1,Intermediate\n");
  REQUIRE(d.n_subjects() == 2);
  CHECK(d.subjects[0].subject_id == "b");
  CHECK(d.subjects[0].times == std::vector<double>{1.0, 3.0});
  CHECK(d.subjects[0].label == "TD");
  CHECK(d.subjects[1].label == "PIGD");
}

TEST_CASE("read_cohort errors carry line numbers") {
  const std::string head = "subject_id,time,m\n";
  CHECK(error_line(head + "a,1,1\na,2,1\nb,1,1\nb,2,1\nc,1,1\nc,abc,1\n") == 7);
  CHECK(error_line(head + "a,1,1\na,2\n") == 3);
  CHECK(error_line(head + "a,1,1\na,1,2\n") == 3);
  CHECK(error_line(head + "a,1,x\n") == 2);
  CHECK(error_line("subject_id,m\n") == 1);
  CHECK_THROWS_AS(parse(""), DataError);
  CHECK_THROWS_AS(parse(head), DataError);
  try {
    parse(head + "a,1,1\na,2,1\nb,1,1\nb,2,1\nc,1,1\nc,abc,1\n");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 7") != std::string::npos);
  }
}

TEST_CASE("read_cohort column selection") {
  const std::string text = "subject_id,time,m1,notes,m2\na,1,1,hi,2\n";
  io::CohortReadOptions opt;
  opt.biomarkers = {"m2", "m1"};
  CHECK_THROWS_AS(parse(text, opt), ParseError);
  opt.ignore_unknown_columns = true;
  const auto d = parse(text, opt);
  CHECK(d.biomarker_names == std::vector<std::string>{"m2", "m1"});
  CHECK(*d.subjects[0].values[0][0] == 2.0);
  opt.biomarkers = {"m3"};
  CHECK_THROWS_AS(parse(text, opt), ParseError);
}

TEST_CASE("synthetic cohorts round-trip through CSV") {
  SyntheticConfig cfg;
  cfg.n_biomarkers = 5;
  cfg.points_per_subject = 3;
  cfg.rng_seed = 13;
  auto ds = generate_dataset(cfg);
  ds.data.subjects[4].values[2][1].reset();
  const auto dir = scratch_dir("cohort");
  io::save_cohort(dir / "c.csv", ds.data);
  const auto back = io::load_cohort(dir / "c.csv");
  CHECK(back == ds.data);
  fs::remove_all(dir);
}

TEST_CASE("format_double round-trips") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng) * std::pow(10.0, i % 20 - 10);
    CHECK(std::stod(io::format_double(v)) == v);
  }
  CHECK(io::format_double(0.1) == "0.1");
  CHECK(io::format_double(2.0) == "2");
}

TEST_CASE("model files round-trip losslessly") {
  const auto m = fitted_model(3);
  const auto dir = scratch_dir("model");
  io::save_model(dir / "a.json", m);
  const auto back = io::load_model(dir / "a.json");
  CHECK(back == m);
  io::save_model(dir / "b.json", back);
  CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));
  fs::remove_all(dir);
}

TEST_CASE("a reloaded model reproduces its objective and evaluation") {
  SyntheticConfig cfg;
  cfg.n_subjects = 40;
  cfg.n_biomarkers = 3;
  cfg.rng_seed = 3;
  const auto ds = generate_dataset(cfg);
  const auto m = fitted_model(3);
  const auto dir = scratch_dir("objective");
  io::save_model(dir / "m.json", m);
  io::save_truth(dir / "t.json", ds.truth, m.subject_ids);
  const auto back = io::load_model(dir / "m.json");
  const double recomputed = log_posterior(ds.data, back.model.state, back.hyper);
  CHECK(std::abs(recomputed - back.model.objective()) <= 1e-12 * std::abs(recomputed));
  const auto truth = io::load_truth(dir / "t.json");
  CHECK(truth == ds.truth);
  CHECK(evaluate_fit(back.model.state, truth) == evaluate_fit(m.model.state, ds.truth));
  fs::remove_all(dir);
}

TEST_CASE("load_model validates invariants and version") {
  const auto m = fitted_model(4);
  auto j = io::to_json(m);
  SUBCASE("negative sigma") {
    j["biomarkers"][0]["sigma"] = -1.0;
    try {
      io::model_from_json(j);
      FAIL("expected an error");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("sigma") != std::string::npos);
    }
  }
  SUBCASE("xi outside [0,1]") {
    j["biomarkers"][1]["xi"] = 1.5;
    CHECK_THROWS_AS(io::model_from_json(j), DataError);
  }
  SUBCASE("pi outside [0,1]") {
    j["subjects"][1]["pi"] = -0.2;
    CHECK_THROWS_AS(io::model_from_json(j), DataError);
  }
  SUBCASE("version mismatch") {
    j["version"] = 2;
    try {
      io::model_from_json(j);
      FAIL("expected an error");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("version") != std::string::npos);
    }
  }
  SUBCASE("wrong format tag") {
    j["format"] = "something";
    CHECK_THROWS_AS(io::model_from_json(j), DataError);
  }
  SUBCASE("unknown key") {
    j["extra"] = 1;
    CHECK_THROWS_AS(io::model_from_json(j), DataError);
  }
  SUBCASE("not JSON") {
    const auto dir = scratch_dir("badjson");
    std::ofstream(dir / "x.json") << "{ not json";
    CHECK_THROWS_AS(io::load_model(dir / "x.json"), DataError);
    fs::remove_all(dir);
  }
}

TEST_CASE("config files") {
  using nlohmann::json;
  const auto sc = io::synthetic_config_from_json(
      json{{"n_subjects", 50}, {"n_biomarkers", 5}, {"snr_level", "high"}, {"seed", 9}});
  CHECK(sc.n_subjects == 50);
  CHECK(sc.snr_level == SnrLevel::kHigh);
  CHECK(io::synthetic_config_from_json(io::to_json(sc)).rng_seed == 9);
  CHECK_THROWS_AS(io::synthetic_config_from_json(json{{"n_subject", 50}}), DataError);
  CHECK_THROWS_AS(io::synthetic_config_from_json(json{{"snr_level", "loud"}}), DataError);

  const auto fc = io::fit_config_from_json(json{{"restarts", 4}, {"tolerance", 1e-7}});
  CHECK(fc.restarts == 4);
  CHECK(fc.tolerance == 1e-7);
  CHECK_THROWS_AS(io::fit_config_from_json(json{{"restarts", 0}}), DataError);

  const auto g = io::benchmark_grid_from_json(json{{"n_biomarkers", {2, 5}}, {"snr_levels", {"low"}}});
  CHECK(g.n_biomarkers == std::vector<std::size_t>{2, 5});
  CHECK(g.snr_levels == std::vector<SnrLevel>{SnrLevel::kLow});
  CHECK_THROWS_AS(io::benchmark_grid_from_json(json{{"n_biomarkers", json::array()}}), DataError);
}

TEST_CASE("plot tables") {
  const auto m = fitted_model(5);
  std::ostringstream traj;
  io::write_trajectories_csv(traj, m.model.state, m.biomarker_names, 0.0, 20.0, 11);
  std::istringstream lines(traj.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line.rfind("biomarker,", 0) == 0);
  std::size_t rows = 0;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 3 * 3 * 11);

  std::ostringstream roc;
  io::write_roc_csv(roc, "xi", roc_auc(std::vector<double>{0.1, 0.9}, {false, true}));
  CHECK(roc.str().rfind("key,threshold,fpr,tpr\n", 0) == 0);

  std::ostringstream tab;
  io::write_subdivision_csv(tab, subdivision_table(std::vector<double>{1.0, 0.0}, {"TD", "PIGD"}));
  CHECK(tab.str().find("N°% data") != std::string::npos);
  CHECK(tab.str().rfind("Condition,Sub-pop 1,Sub-pop 2", 0) == 0);
}

TEST_CASE("shipped example configs load") {
  const std::filesystem::path dir = DPMOST_CONFIG_DIR;
  const auto sim = io::synthetic_config_from_json(io::read_json(dir / "simulate.json"));
  CHECK(sim.n_biomarkers == 5);
  CHECK(io::synthetic_config_from_json(io::read_json(dir / "simulate_staggered.json")).shift_stagger == 2.0);
  const auto fit_json = io::read_json(dir / "fit.json");
  CHECK(io::fit_config_from_json(fit_json.at("fit")).restarts == 5);
  CHECK(io::hyperparameters_from_json(fit_json.at("hyperparameters")).granularity == Granularity::kSubject);
  const auto grid = io::benchmark_grid_from_json(io::read_json(dir / "benchmark_grid.json"));
  CHECK(grid.n_biomarkers.size() * grid.snr_levels.size() == 9);
  CHECK(grid.fit.restarts == 3);
}
