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

#include "dpmost/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <system_error>
#include <unordered_map>

#include "dpmost/error.hpp"

namespace dpmost::io {

using nlohmann::json;

namespace {

std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  if (quoted) throw ParseError(line_no, "unterminated quoted field");
  fields.push_back(std::move(field));
  return fields;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

std::optional<double> parse_double(const std::string& text) {
  const std::string s = trim(text);
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  if (begin != end && *begin == '+') ++begin;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v) || begin == end) return std::nullopt;
  return v;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  return out;
}

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, std::string_view what) {
  if (!j.is_object()) throw DataError(std::string(what) + " must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw DataError("unknown key '" + key + "' in " + std::string(what));
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw DataError(std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

CohortData read_cohort(std::istream& in, const CohortReadOptions& options) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!trim(line).empty()) return true;
    }
    return false;
  };
  if (!next_line()) throw DataError("cohort file is empty");
  std::vector<std::string> header = split_csv_line(line, line_no);
  for (auto& h : header) h = trim(h);

  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < header.size(); ++i)
    if (!column.emplace(header[i], i).second) throw ParseError(line_no, "duplicate column '" + header[i] + "'");
  if (!column.count("subject_id")) throw ParseError(line_no, "missing 'subject_id' column");
  if (!column.count("time")) throw ParseError(line_no, "missing 'time' column");
  const std::optional<std::size_t> label_col =
      column.count("label") ? std::optional(column.at("label")) : std::nullopt;

  CohortData data;
  std::vector<std::size_t> biomarker_cols;
  if (options.biomarkers.empty()) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == "subject_id" || header[i] == "time" || header[i] == "label") continue;
      if (header[i].empty()) throw ParseError(line_no, "empty column name");
      data.biomarker_names.push_back(header[i]);
      biomarker_cols.push_back(i);
    }
  } else {
    std::set<std::string> wanted(options.biomarkers.begin(), options.biomarkers.end());
    for (const auto& name : options.biomarkers) {
      if (!column.count(name)) throw ParseError(line_no, "biomarker column '" + name + "' not found");
      data.biomarker_names.push_back(name);
      biomarker_cols.push_back(column.at(name));
    }
    for (const auto& h : header) {
      if (h == "subject_id" || h == "time" || h == "label" || wanted.count(h)) continue;
      if (!options.ignore_unknown_columns) throw ParseError(line_no, "unknown column '" + h + "'");
    }
  }
  if (biomarker_cols.empty()) throw ParseError(line_no, "no biomarker columns");

  struct Row {
    double time;
    std::vector<std::optional<double>> values;
    std::string label;
    std::size_t line;
  };
  std::vector<std::vector<Row>> rows;
  std::unordered_map<std::string, std::size_t> subject_index;
  std::vector<std::string> ids;
  while (next_line()) {
    const auto fields = split_csv_line(line, line_no);
    if (fields.size() != header.size())
      throw ParseError(line_no, "expected " + std::to_string(header.size()) + " fields, found " +
                                    std::to_string(fields.size()));
    const std::string id = trim(fields[column.at("subject_id")]);
    if (id.empty()) throw ParseError(line_no, "empty subject_id");
    Row row;
    row.line = line_no;
    const auto time = parse_double(fields[column.at("time")]);
    if (!time) throw ParseError(line_no, "time '" + fields[column.at("time")] + "' is not a finite number");
    row.time = *time;
    for (std::size_t b = 0; b < biomarker_cols.size(); ++b) {
      const std::string& cell = fields[biomarker_cols[b]];
      if (trim(cell).empty()) {
        row.values.emplace_back();
        continue;
      }
      const auto v = parse_double(cell);
      if (!v) throw ParseError(line_no, data.biomarker_names[b] + " value '" + cell + "' is not a finite number");
      row.values.push_back(*v);
    }
    if (label_col) row.label = trim(fields[*label_col]);
    auto [it, inserted] = subject_index.emplace(id, rows.size());
    if (inserted) {
      rows.emplace_back();
      ids.push_back(id);
    }
    rows[it->second].push_back(std::move(row));
  }

  const std::size_t n_b = biomarker_cols.size();
  for (std::size_t j = 0; j < rows.size(); ++j) {
    auto& visits = rows[j];
    std::stable_sort(visits.begin(), visits.end(), [](const Row& a, const Row& b) { return a.time < b.time; });
    SubjectSeries s;
    s.subject_id = ids[j];
    s.values.resize(n_b);
    bool any = false;
    for (std::size_t l = 0; l < visits.size(); ++l) {
      if (l > 0 && visits[l].time == visits[l - 1].time)
        throw ParseError(std::max(visits[l].line, visits[l - 1].line),
                         "duplicate visit time for subject '" + s.subject_id + "'");
      s.times.push_back(visits[l].time);
      for (std::size_t b = 0; b < n_b; ++b) {
        s.values[b].push_back(visits[l].values[b]);
        any = any || visits[l].values[b].has_value();
      }
      if (!visits[l].label.empty()) s.label = visits[l].label;
    }
    if (!any) throw ParseError(visits.front().line, "subject '" + s.subject_id + "' has no measurements");
    data.subjects.push_back(std::move(s));
  }
  if (data.subjects.empty()) throw DataError("cohort file has no data rows");
  data.validate();
  return data;
}

CohortData load_cohort(const std::filesystem::path& path, const CohortReadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open cohort file '" + path.string() + "'");
  return read_cohort(in, options);
}

void write_cohort(std::ostream& out, const CohortData& data) {
  const bool labels = std::any_of(data.subjects.begin(), data.subjects.end(),
                                  [](const SubjectSeries& s) { return !s.label.empty(); });
  out << "subject_id,time";
  for (const auto& name : data.biomarker_names) out << ',' << csv_quote(name);
  if (labels) out << ",label";
  out << '\n';
  for (const auto& s : data.subjects) {
    for (std::size_t l = 0; l < s.times.size(); ++l) {
      out << csv_quote(s.subject_id) << ',' << format_double(s.times[l]);
      for (const auto& column : s.values) {
        out << ',';
        if (column[l]) out << format_double(*column[l]);
      }
      if (labels) out << ',' << csv_quote(s.label);
      out << '\n';
    }
  }
}

void save_cohort(const std::filesystem::path& path, const CohortData& data) {
  auto out = open_out(path);
  write_cohort(out, data);
}

json to_json(const SigmoidParams& p) {
  return {{"supremum", p.supremum}, {"growth_rate", p.growth_rate}, {"midpoint", p.midpoint}};
}

SigmoidParams sigmoid_from_json(const json& j) {
  check_keys(j, {"supremum", "growth_rate", "midpoint"}, "sigmoid");
  try {
    return {j.at("supremum").get<double>(), j.at("growth_rate").get<double>(), j.at("midpoint").get<double>()};
  } catch (const json::exception& e) {
    throw DataError(std::string("bad sigmoid: ") + e.what());
  }
}

json to_json(const ModelFile& m) {
  const ModelState& s = m.model.state;
  json biomarkers = json::array();
  for (std::size_t b = 0; b < s.n_biomarkers(); ++b)
    biomarkers.push_back({{"name", m.biomarker_names.at(b)},
                          {"theta0", to_json(s.shared[b])},
                          {"theta1", to_json(s.sub1[b])},
                          {"theta2", to_json(s.sub2[b])},
                          {"sigma", s.sigma[b]},
                          {"xi", s.xi[b]},
                          {"split_confidence", s.split_confidence(b)}});
  json subjects = json::array();
  for (std::size_t j = 0; j < s.n_subjects(); ++j)
    subjects.push_back({{"id", m.subject_ids.at(j)},
                        {"pi", s.pi[j]},
                        {"shift", m.shifts.empty() ? 0.0 : m.shifts.at(j)}});
  return {{"format", "dpmost-model"},
          {"version", kModelFormatVersion},
          {"hyperparameters", to_json(m.hyper)},
          {"biomarkers", biomarkers},
          {"subjects", subjects},
          {"objective_trace", m.model.objective_trace},
          {"fit",
           {{"seed", m.seed},
            {"restarts", m.restarts},
            {"iterations", m.model.iterations()},
            {"converged", m.model.converged},
            {"restart_index", m.model.restart_index}}}};
}

ModelFile model_from_json(const json& j) {
  try {
    check_keys(j, {"format", "version", "hyperparameters", "biomarkers", "subjects", "objective_trace", "fit"},
               "model file");
    if (j.value("format", "") != "dpmost-model") throw DataError("not a dpmost model file");
    const int version = j.at("version").get<int>();
    if (version != kModelFormatVersion)
      throw DataError("model file version " + std::to_string(version) + " is not supported (expected " +
                      std::to_string(kModelFormatVersion) + ")");
    ModelFile m;
    m.hyper = hyperparameters_from_json(j.at("hyperparameters"));
    ModelState& s = m.model.state;
    for (const auto& b : j.at("biomarkers")) {
      check_keys(b, {"name", "theta0", "theta1", "theta2", "sigma", "xi", "split_confidence"}, "biomarker");
      m.biomarker_names.push_back(b.at("name").get<std::string>());
      s.shared.push_back(sigmoid_from_json(b.at("theta0")));
      s.sub1.push_back(sigmoid_from_json(b.at("theta1")));
      s.sub2.push_back(sigmoid_from_json(b.at("theta2")));
      s.sigma.push_back(b.at("sigma").get<double>());
      s.xi.push_back(b.at("xi").get<double>());
    }
    for (const auto& subject : j.at("subjects")) {
      check_keys(subject, {"id", "pi", "shift"}, "subject");
      m.subject_ids.push_back(subject.at("id").get<std::string>());
      s.pi.push_back(subject.at("pi").get<double>());
      m.shifts.push_back(subject.at("shift").get<double>());
    }
    m.model.objective_trace = j.at("objective_trace").get<std::vector<double>>();
    if (m.model.objective_trace.empty()) throw DataError("model file has an empty objective trace");
    const json& f = j.at("fit");
    check_keys(f, {"seed", "restarts", "iterations", "converged", "restart_index"}, "fit metadata");
    m.seed = f.at("seed").get<std::uint64_t>();
    m.restarts = f.at("restarts").get<int>();
    m.model.converged = f.at("converged").get<bool>();
    m.model.restart_index = f.at("restart_index").get<int>();
    if (f.at("iterations").get<int>() != m.model.iterations())
      throw DataError("fit.iterations disagrees with the objective trace length");
    try {
      s.validate();
    } catch (const std::invalid_argument& e) {
      throw DataError(std::string("invalid model parameters: ") + e.what());
    }
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const ModelFile& model) {
  auto out = open_out(path);
  out << to_json(model).dump(2) << '\n';
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

ModelFile load_model(const std::filesystem::path& path) { return model_from_json(read_json(path)); }

json to_json(const GroundTruth& t, const std::vector<std::string>& subject_ids) {
  json biomarkers = json::array();
  for (std::size_t b = 0; b < t.true_curves.size(); ++b) {
    json curves = json::array();
    for (const auto& c : t.true_curves[b]) curves.push_back(to_json(c));
    biomarkers.push_back({{"split", static_cast<bool>(t.split_flags[b])}, {"curves", curves}, {"sigma", t.true_sigma[b]}});
  }
  json subjects = json::array();
  for (std::size_t j = 0; j < t.subject_population.size(); ++j)
    subjects.push_back({{"id", subject_ids.at(j)}, {"population", t.subject_population[j]}, {"shift", t.true_shifts[j]}});
  return {{"format", "dpmost-truth"},
          {"version", 1},
          {"time_range", {t.time_lo, t.time_hi}},
          {"biomarkers", biomarkers},
          {"subjects", subjects}};
}

GroundTruth truth_from_json(const json& j) {
  try {
    check_keys(j, {"format", "version", "time_range", "biomarkers", "subjects"}, "truth file");
    if (j.value("format", "") != "dpmost-truth") throw DataError("not a dpmost ground-truth file");
    if (j.at("version").get<int>() != 1) throw DataError("unsupported ground-truth version");
    GroundTruth t;
    t.time_lo = j.at("time_range").at(0).get<double>();
    t.time_hi = j.at("time_range").at(1).get<double>();
    for (const auto& b : j.at("biomarkers")) {
      check_keys(b, {"split", "curves", "sigma"}, "truth biomarker");
      t.split_flags.push_back(b.at("split").get<bool>());
      std::vector<SigmoidParams> curves;
      for (const auto& c : b.at("curves")) curves.push_back(sigmoid_from_json(c));
      if (curves.size() != (t.split_flags.back() ? 2u : 1u))
        throw DataError("truth biomarker curve count does not match its split flag");
      t.true_curves.push_back(std::move(curves));
      t.true_sigma.push_back(b.at("sigma").get<double>());
    }
    for (const auto& s : j.at("subjects")) {
      check_keys(s, {"id", "population", "shift"}, "truth subject");
      const int p = s.at("population").get<int>();
      if (p != 1 && p != 2) throw DataError("truth population must be 1 or 2");
      t.subject_population.push_back(p);
      t.true_shifts.push_back(s.at("shift").get<double>());
    }
    return t;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed ground-truth file: ") + e.what());
  }
}

void save_truth(const std::filesystem::path& path, const GroundTruth& truth,
                const std::vector<std::string>& subject_ids) {
  auto out = open_out(path);
  out << to_json(truth, subject_ids).dump(2) << '\n';
}

GroundTruth load_truth(const std::filesystem::path& path) { return truth_from_json(read_json(path)); }

json to_json(const Hyperparameters& h) {
  return {{"beta", h.beta}, {"beta_noise", h.beta_noise}, {"granularity", std::string(to_string(h.granularity))}};
}

Hyperparameters hyperparameters_from_json(const json& j, Hyperparameters base) {
  check_keys(j, {"beta", "beta_noise", "granularity"}, "hyperparameters");
  Hyperparameters h = base;
  h.beta = get_or(j, "beta", h.beta);
  h.beta_noise = get_or(j, "beta_noise", h.beta_noise);
  try {
    if (j.contains("granularity")) h.granularity = granularity_from_string(j.at("granularity").get<std::string>());
    h.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }
  return h;
}

SyntheticConfig synthetic_config_from_json(const json& j) {
  check_keys(j, {"n_subjects", "n_biomarkers", "snr_level", "separation_mse", "noise_std", "time_range",
                 "points_per_subject", "visit_interval", "split_fraction", "shift_stagger", "seed"},
             "synthetic config");
  SyntheticConfig c;
  c.n_subjects = get_or(j, "n_subjects", c.n_subjects);
  c.n_biomarkers = get_or(j, "n_biomarkers", c.n_biomarkers);
  c.separation_mse = get_or(j, "separation_mse", c.separation_mse);
  c.noise_std = get_or(j, "noise_std", c.noise_std);
  c.points_per_subject = get_or(j, "points_per_subject", c.points_per_subject);
  c.visit_interval = get_or(j, "visit_interval", c.visit_interval);
  c.split_fraction = get_or(j, "split_fraction", c.split_fraction);
  c.shift_stagger = get_or(j, "shift_stagger", c.shift_stagger);
  c.rng_seed = get_or(j, "seed", c.rng_seed);
  try {
    if (j.contains("snr_level")) c.snr_level = snr_from_string(j.at("snr_level").get<std::string>());
    if (j.contains("time_range")) {
      const auto range = j.at("time_range").get<std::vector<double>>();
      if (range.size() != 2) throw DataError("time_range must have two entries");
      c.time_lo = range[0];
      c.time_hi = range[1];
    }
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("synthetic config: ") + e.what());
  } catch (const json::exception& e) {
    throw DataError(std::string("synthetic config: ") + e.what());
  }
  return c;
}

json to_json(const SyntheticConfig& c) {
  return {{"n_subjects", c.n_subjects},
          {"n_biomarkers", c.n_biomarkers},
          {"snr_level", std::string(to_string(c.snr_level))},
          {"separation_mse", c.separation_mse},
          {"noise_std", c.noise_std},
          {"time_range", {c.time_lo, c.time_hi}},
          {"points_per_subject", c.points_per_subject},
          {"visit_interval", c.visit_interval},
          {"split_fraction", c.split_fraction},
          {"shift_stagger", c.shift_stagger},
          {"seed", c.rng_seed}};
}

FitConfig fit_config_from_json(const json& j, FitConfig base) {
  check_keys(j, {"max_iterations", "tolerance", "restarts", "seed"}, "fit config");
  base.max_iterations = get_or(j, "max_iterations", base.max_iterations);
  base.tolerance = get_or(j, "tolerance", base.tolerance);
  base.restarts = get_or(j, "restarts", base.restarts);
  base.rng_seed = get_or(j, "seed", base.rng_seed);
  try {
    base.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("fit config: ") + e.what());
  }
  return base;
}

BenchmarkGrid benchmark_grid_from_json(const json& j) {
  check_keys(j, {"n_biomarkers", "snr_levels", "base", "hyperparameters", "fit", "seed"}, "benchmark grid");
  BenchmarkGrid g;
  g.fit.restarts = 3;
  g.n_biomarkers = get_or(j, "n_biomarkers", g.n_biomarkers);
  if (j.contains("snr_levels")) {
    g.snr_levels.clear();
    try {
      for (const auto& s : j.at("snr_levels")) g.snr_levels.push_back(snr_from_string(s.get<std::string>()));
    } catch (const std::exception& e) {
      throw DataError(std::string("benchmark grid: ") + e.what());
    }
  }
  if (j.contains("base")) g.base = synthetic_config_from_json(j.at("base"));
  if (j.contains("hyperparameters")) g.hyper = hyperparameters_from_json(j.at("hyperparameters"));
  if (j.contains("fit")) g.fit = fit_config_from_json(j.at("fit"), g.fit);
  g.seed = get_or(j, "seed", g.seed);
  if (g.n_biomarkers.empty() || g.snr_levels.empty()) throw DataError("benchmark grid has no cells");
  return g;
}

void write_trajectories_csv(std::ostream& out, const ModelState& state,
                            const std::vector<std::string>& names, double lo, double hi,
                            std::size_t n_points) {
  static constexpr const char* kNames[] = {"shared", "sub1", "sub2"};
  const auto grid = uniform_grid(lo, hi, n_points);
  out << "biomarker,component,time,value\n";
  for (std::size_t b = 0; b < state.n_biomarkers(); ++b)
    for (std::size_t k = 0; k < 3; ++k)
      for (double t : grid)
        out << csv_quote(names.at(b)) << ',' << kNames[k] << ',' << format_double(t) << ','
            << format_double(sigmoid_eval(state.curve(b, k), t)) << '\n';
}

void write_true_trajectories_csv(std::ostream& out, const GroundTruth& truth,
                                 const std::vector<std::string>& names, std::size_t n_points) {
  const auto grid = uniform_grid(truth.time_lo, truth.time_hi, n_points);
  out << "biomarker,component,time,value\n";
  for (std::size_t b = 0; b < truth.true_curves.size(); ++b) {
    const auto& curves = truth.true_curves[b];
    for (std::size_t k = 0; k < curves.size(); ++k) {
      const char* label = curves.size() == 1 ? "shared" : (k == 0 ? "sub1" : "sub2");
      for (double t : grid)
        out << csv_quote(names.at(b)) << ',' << label << ',' << format_double(t) << ','
            << format_double(sigmoid_eval(curves[k], t)) << '\n';
    }
  }
}

void write_roc_csv(std::ostream& out, const std::string& key, const RocResult& roc, bool header) {
  if (header) out << "key,threshold,fpr,tpr\n";
  for (std::size_t i = 0; i < roc.fpr.size(); ++i)
    out << key << ',' << (i == 0 ? std::string("inf") : format_double(roc.thresholds[i - 1])) << ','
        << format_double(roc.fpr[i]) << ',' << format_double(roc.tpr[i]) << '\n';
}

void write_evaluation_csv(std::ostream& out, const Evaluation& e, const std::vector<std::string>& names) {
  out << "metric,biomarker,value\n";
  for (std::size_t b = 0; b < e.ospa.size(); ++b) {
    const std::string name = csv_quote(names.at(b));
    out << "ospa," << name << ',' << format_double(e.ospa[b]) << '\n';
    out << "unmatched_curves," << name << ',' << e.unmatched[b] << '\n';
    out << "sigma_relative_error," << name << ',' << format_double(e.sigma_error[b]) << '\n';
    out << "split_confidence," << name << ',' << format_double(e.split_scores[b]) << '\n';
    out << "true_split," << name << ',' << (e.split_flags[b] ? 1 : 0) << '\n';
  }
  out << "ospa_mean,," << format_double(e.ospa_mean) << '\n';
  out << "sigma_relative_error_mean,," << format_double(e.sigma_error_mean) << '\n';
  out << "assignment_accuracy,," << format_double(e.assignment_accuracy) << '\n';
  out << "labels_swapped,," << (e.labels_swapped ? 1 : 0) << '\n';
}

void write_subdivision_csv(std::ostream& out, const SubdivisionTable& table) {
  out << "Condition,Sub-pop 1,Sub-pop 2,subjects\n";
  for (const auto& row : table.rows)
    out << csv_quote(row.condition) << ',' << format_double(row.sub1) << ',' << format_double(row.sub2) << ','
        << row.count << '\n';
  const double n = static_cast<double>(std::max<std::size_t>(table.n_subjects, 1));
  out << "N°% data," << format_double(100.0 * static_cast<double>(table.n_sub1) / n) << "%,"
      << format_double(100.0 * static_cast<double>(table.n_subjects - table.n_sub1) / n) << "%,"
      << table.n_subjects << '\n';
}

void write_benchmark_csv(std::ostream& out, const BenchmarkReport& report, const BenchmarkGrid&) {
  out << "n_biomarkers,snr,repetition,seed,metric,value\n";
  for (const auto& r : report.datasets) {
    const auto& cell = report.cells[r.cell];
    const std::string prefix = std::to_string(cell.n_biomarkers) + ',' + std::string(to_string(cell.snr)) + ',' +
                               std::to_string(r.repetition) + ',' + std::to_string(r.seed) + ',';
    out << prefix << "ok," << (r.ok ? 1 : 0) << '\n';
    if (!r.ok) continue;
    const Evaluation& e = r.evaluation;
    out << prefix << "ospa," << format_double(e.ospa_mean) << '\n';
    out << prefix << "sigma_relative_error," << format_double(e.sigma_error_mean) << '\n';
    out << prefix << "assignment_accuracy," << format_double(e.assignment_accuracy) << '\n';
    out << prefix << "objective," << format_double(r.objective) << '\n';
    out << prefix << "iterations," << r.iterations << '\n';
    out << prefix << "converged," << (r.converged ? 1 : 0) << '\n';
    for (std::size_t b = 0; b < e.split_scores.size(); ++b)
      out << prefix << "split_confidence_" << (e.split_flags[b] ? "split" : "nosplit") << ','
          << format_double(e.split_scores[b]) << '\n';
  }
}

json benchmark_summary(const BenchmarkReport& report, int repetitions) {
  json cells = json::array();
  for (const auto& c : report.cells) {
    json cell = {{"n_biomarkers", c.n_biomarkers},
                 {"snr", std::string(to_string(c.snr))},
                 {"target_mse", target_mse(c.snr)},
                 {"n_ok", c.n_ok},
                 {"n_failed", c.n_failed},
                 {"flagged", c.flagged},
                 {"median_ospa", c.median_ospa},
                 {"median_sigma_relative_error", c.median_sigma_error},
                 {"median_assignment_accuracy", c.median_accuracy},
                 {"auc_xi", c.roc_xi ? json(c.roc_xi->auc) : json(nullptr)},
                 {"auc_pi", c.roc_pi ? json(c.roc_pi->auc) : json(nullptr)}};
    json errors = json::array();
    for (const auto& r : report.datasets)
      if (&report.cells[r.cell] == &c && !r.ok) errors.push_back({{"repetition", r.repetition}, {"error", r.error}});
    cell["errors"] = errors;
    cells.push_back(cell);
  }
  return {{"repetitions", repetitions}, {"cells", cells}};
}

}  // namespace dpmost::io
