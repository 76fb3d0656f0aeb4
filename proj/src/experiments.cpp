// Copyright 2026 The dephasim authors
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

#include "dephasim/experiments.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dephasim {

using nlohmann::ordered_json;

namespace {

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

ordered_json model_to_json(const RateModel& model) {
  ordered_json j;
  std::visit(
      [&j](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ConstantRate>) {
          j["type"] = "constant";
          j["gamma"] = m.gamma;
        } else if constexpr (std::is_same_v<T, SineRate>) {
          j["type"] = "sine";
          j["gamma"] = m.gamma;
          j["nu"] = m.nu;
        } else if constexpr (std::is_same_v<T, OffsetSineRate>) {
          j["type"] = "offset_sine";
          j["gamma"] = m.gamma;
          j["gamma0"] = m.gamma0;
          j["nu"] = m.nu;
        } else if constexpr (std::is_same_v<T, SineSumRate>) {
          j["type"] = "sine_sum";
          j["gamma"] = m.gamma;
          j["frequencies"] = m.frequencies;
        } else {
          j["type"] = "nmr";
          j["gamma"] = m.gamma;
          j["J"] = m.coupling;
          j["theta"] = m.theta;
        }
      },
      model);
  return j;
}

RateModel model_from_json(const ordered_json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "constant") return ConstantRate{j.at("gamma").get<double>()};
  if (type == "sine")
    return SineRate{j.at("gamma").get<double>(), j.at("nu").get<double>()};
  if (type == "offset_sine")
    return OffsetSineRate{j.at("gamma").get<double>(), j.at("gamma0").get<double>(),
                          j.at("nu").get<double>()};
  if (type == "sine_sum")
    return SineSumRate{j.at("gamma").get<double>(),
                       j.at("frequencies").get<std::vector<double>>()};
  if (type == "nmr")
    return NmrRate{j.at("gamma").get<double>(), j.at("J").get<double>(),
                   j.at("theta").get<double>()};
  throw ConfigError("unknown rate model type '" + type + "'");
}

ChainSpec chain_from_json(const ordered_json& j) {
  ChainSpec spec;
  spec.n_sites = j.at("n_sites").get<int>();
  if (j.contains("frequencies"))
    spec.frequencies = j.at("frequencies").get<std::vector<double>>();
  else
    spec.frequencies.assign(static_cast<size_t>(spec.n_sites),
                            j.value("frequency", 1.0));
  if (j.contains("couplings"))
    spec.couplings = j.at("couplings").get<std::vector<double>>();
  else
    spec.couplings.assign(spec.n_sites > 0 ? static_cast<size_t>(spec.n_sites - 1) : 0,
                          j.value("coupling", 0.0));
  spec.injection_site = j.value("injection_site", 1);
  spec.injection_rate = j.at("injection_rate").get<double>();
  spec.extraction_site = j.at("extraction_site").get<int>();
  spec.extraction_rate = j.at("extraction_rate").get<double>();
  return spec;
}

ordered_json chain_to_json(const ChainSpec& spec) {
  ordered_json j;
  j["n_sites"] = spec.n_sites;
  j["frequencies"] = spec.frequencies;
  j["couplings"] = spec.couplings;
  j["injection_site"] = spec.injection_site;
  j["injection_rate"] = spec.injection_rate;
  j["extraction_site"] = spec.extraction_site;
  j["extraction_rate"] = spec.extraction_rate;
  return j;
}

}  // namespace

void SweepSpec::validate() const {
  if (parameter != "gamma" && parameter != "theta" && parameter != "nu")
    throw ConfigError("sweep parameter must be gamma, theta or nu");
  if (!std::isfinite(min) || !std::isfinite(max) || min > max)
    throw ConfigError("sweep bounds must be finite with min <= max");
  if (points < 2) throw ConfigError("sweep needs at least 2 points");
  if (spacing != "linear") throw ConfigError("only linear sweep spacing is supported");
}

std::vector<double> SweepSpec::grid() const {
  std::vector<double> g(static_cast<size_t>(points));
  for (int i = 0; i < points; ++i)
    g[static_cast<size_t>(i)] = min + (max - min) * i / (points - 1);
  return g;
}

void ExperimentConfig::validate() const {
  chain.validate();
  dephasim::validate(model);
  sweep.validate();
  integrator.validate();
  // Fail early if the swept parameter does not apply to the model.
  (void)with_parameter(model, sweep.parameter, sweep.min);
}

ExperimentConfig parse_config(const std::string& json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    const int version = j.at("schema_version").get<int>();
    if (version != kConfigSchemaVersion)
      throw ConfigError("unsupported config schema_version");
    ExperimentConfig cfg;
    cfg.chain = chain_from_json(j.at("chain"));
    cfg.model = model_from_json(j.at("rate_model"));
    const auto& s = j.at("sweep");
    cfg.sweep.parameter = s.at("parameter").get<std::string>();
    cfg.sweep.min = s.at("min").get<double>();
    cfg.sweep.max = s.at("max").get<double>();
    cfg.sweep.points = s.at("points").get<int>();
    cfg.sweep.spacing = s.value("spacing", "linear");
    if (j.contains("integrator")) {
      const auto& in = j.at("integrator");
      cfg.integrator.rtol = in.value("rtol", cfg.integrator.rtol);
      cfg.integrator.atol = in.value("atol", cfg.integrator.atol);
      cfg.integrator.initial_step = in.value("initial_step", cfg.integrator.initial_step);
      cfg.integrator.max_step = in.value("max_step", cfg.integrator.max_step);
      cfg.integrator.t_max = in.value("t_max", cfg.integrator.t_max);
      cfg.integrator.window_tol = in.value("window_tol", cfg.integrator.window_tol);
      cfg.integrator.probe_window = in.value("probe_window", cfg.integrator.probe_window);
    }
    cfg.output_path = j.value("output", cfg.output_path);
    cfg.name = j.value("name", cfg.name);
    cfg.validate();
    return cfg;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const ExperimentConfig& cfg) {
  ordered_json j;
  j["schema_version"] = kConfigSchemaVersion;
  j["name"] = cfg.name;
  j["chain"] = chain_to_json(cfg.chain);
  j["rate_model"] = model_to_json(cfg.model);
  j["sweep"] = {{"parameter", cfg.sweep.parameter},
                {"min", cfg.sweep.min},
                {"max", cfg.sweep.max},
                {"points", cfg.sweep.points},
                {"spacing", cfg.sweep.spacing}};
  j["integrator"] = {{"rtol", cfg.integrator.rtol},
                     {"atol", cfg.integrator.atol},
                     {"t_max", cfg.integrator.t_max},
                     {"max_step", cfg.integrator.max_step},
                     {"window_tol", cfg.integrator.window_tol},
                     {"probe_window", cfg.integrator.probe_window}};
  j["output"] = cfg.output_path;
  return j.dump(2) + "\n";
}

std::vector<SweepRecord> run_sweep(const ExperimentConfig& cfg, int threads) {
  cfg.validate();
  const std::vector<double> grid = cfg.sweep.grid();
  const int n_points = static_cast<int>(grid.size());

  // CP pre-check of every swept model over the integration horizon.
  for (int i = 0; i < n_points; ++i) {
    const RateModel m = with_parameter(cfg.model, cfg.sweep.parameter, grid[static_cast<size_t>(i)]);
    validate(m);
    const CpReport rep = cp_check_single_channel(m, cfg.integrator.t_max);
    if (!rep.valid) {
      std::ostringstream os;
      os << "rate model at sweep point " << cfg.sweep.parameter << " = "
         << grid[static_cast<size_t>(i)] << " violates complete positivity at t = "
         << rep.first_violation_time << " (running integral " << rep.min_integral << ")";
      throw CpViolationError(os.str());
    }
  }

  const GeneratorContext base(cfg.chain, cfg.model);
  std::vector<SweepRecord> records(static_cast<size_t>(n_points));

  std::exception_ptr first_error = nullptr;
  const int nthreads = threads > 0 ? threads : 0;
#ifdef _OPENMP
  const int use_threads = nthreads > 0 ? nthreads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(use_threads)
#endif
  for (int i = 0; i < n_points; ++i) {
    bool skip = false;
#ifdef _OPENMP
#pragma omp critical(dephasim_sweep_error)
#endif
    skip = (first_error != nullptr);
    if (skip) continue;
    try {
      const double value = grid[static_cast<size_t>(i)];
      const RateModel m = with_parameter(cfg.model, cfg.sweep.parameter, value);
      const GeneratorContext ctx = base.with_model(m);
      const SteadyStateResult ss = find_steady_state(ctx, cfg.integrator);

      SweepRecord rec;
      rec.parameter = value;
      rec.populations = ss.populations;
      rec.converged = ss.converged;
      rec.periods = ss.windows_used;
      rec.stats = ss.stats;
      const auto [j, jt] = exciton_current(ss.populations, cfg.chain);
      (void)j;
      rec.j_tilde = jt;
      rec.delta_n = occupation_spread(ss.populations, cfg.chain.extraction_site);
      rec.nm_quantifier_period =
          nm_quantifier(m, 0.0, fundamental_period(m, cfg.integrator.probe_window));
      records[static_cast<size_t>(i)] = std::move(rec);
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical(dephasim_sweep_error)
#endif
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);
  return records;
}

std::string records_to_csv(const std::vector<SweepRecord>& records, int n_sites) {
  std::ostringstream os;
  os << "parameter,J_tilde,Delta_n";
  for (int i = 1; i <= n_sites; ++i) os << ",n" << i;
  os << ",converged,periods,F\n";
  for (const auto& r : records) {
    os << fmt("%.10g", r.parameter) << ',' << fmt("%.12e", r.j_tilde) << ','
       << fmt("%.12e", r.delta_n);
    for (int i = 0; i < n_sites; ++i)
      os << ',' << fmt("%.12e", i < r.populations.size() ? r.populations(i) : 0.0);
    os << ',' << (r.converged ? 1 : 0) << ',' << r.periods << ','
       << fmt("%.12e", r.nm_quantifier_period) << '\n';
  }
  return os.str();
}

void write_csv(const std::string& path, const std::vector<SweepRecord>& records,
               int n_sites) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
  out << records_to_csv(records, n_sites);
}

CurveSummary report_figure_summary(const std::vector<SweepRecord>& records,
                                   const std::string& curve_name, double tol) {
  if (records.empty()) throw std::invalid_argument("report_figure_summary: empty sweep");
  CurveSummary s;
  s.curve = curve_name;
  const int n = static_cast<int>(records.size());
  for (int i = 0; i < n; ++i) {
    if (records[static_cast<size_t>(i)].j_tilde >
        records[static_cast<size_t>(s.argmax_index)].j_tilde)
      s.argmax_index = i;
    if (records[static_cast<size_t>(i)].delta_n >
        records[static_cast<size_t>(s.argmax_spread_index)].delta_n)
      s.argmax_spread_index = i;
    if (!records[static_cast<size_t>(i)].converged) s.all_converged = false;
  }
  s.argmax_parameter = records[static_cast<size_t>(s.argmax_index)].parameter;
  s.max_j_tilde = records[static_cast<size_t>(s.argmax_index)].j_tilde;
  s.argmax_spread_parameter = records[static_cast<size_t>(s.argmax_spread_index)].parameter;

  bool non_decreasing = true, non_increasing = true;
  for (int i = 0; i + 1 < n; ++i) {
    const double d = records[static_cast<size_t>(i + 1)].j_tilde -
                     records[static_cast<size_t>(i)].j_tilde;
    if (d < -tol) non_decreasing = false;
    if (d > tol) non_increasing = false;
  }
  for (int i = 1; i + 1 < n; ++i) {
    const double dl = records[static_cast<size_t>(i)].j_tilde -
                      records[static_cast<size_t>(i - 1)].j_tilde;
    const double dr = records[static_cast<size_t>(i)].j_tilde -
                      records[static_cast<size_t>(i + 1)].j_tilde;
    if ((dl > tol && dr > tol) || (dl < -tol && dr < -tol)) ++s.interior_extrema;
  }

  if (non_decreasing && non_increasing) {
    s.verdict = "flat";
  } else if (non_decreasing) {
    s.verdict = "increasing";
  } else if (non_increasing) {
    s.verdict = "decreasing";
  } else {
    bool rises_then_falls = s.argmax_index > 0 && s.argmax_index < n - 1;
    for (int i = 0; rises_then_falls && i + 1 < n; ++i) {
      const double d = records[static_cast<size_t>(i + 1)].j_tilde -
                       records[static_cast<size_t>(i)].j_tilde;
      if (i + 1 <= s.argmax_index ? d < -tol : d > tol) rises_then_falls = false;
    }
    s.verdict = rises_then_falls ? "interior-max" : "non-monotonic";
  }
  return s;
}

std::string summaries_to_json(const std::vector<CurveSummary>& summaries) {
  ordered_json arr = ordered_json::array();
  for (const auto& s : summaries) {
    ordered_json j;
    j["curve"] = s.curve;
    j["argmax_parameter"] = s.argmax_parameter;
    j["argmax_index"] = s.argmax_index;
    j["max_J_tilde"] = s.max_j_tilde;
    j["argmax_spread_parameter"] = s.argmax_spread_parameter;
    j["argmax_spread_index"] = s.argmax_spread_index;
    j["verdict"] = s.verdict;
    j["interior_extrema"] = s.interior_extrema;
    j["all_converged"] = s.all_converged;
    if (s.markovian_crossover)
      j["markovian_crossover"] = *s.markovian_crossover;
    arr.push_back(j);
  }
  return arr.dump(2) + "\n";
}

std::string sample_nmr_rates(const std::vector<double>& thetas, double coupling,
                             double gamma, double t_end, int samples) {
  if (thetas.empty() || samples < 2 || t_end <= 0.0)
    throw std::invalid_argument("sample_nmr_rates: bad arguments");
  std::vector<RateModel> models;
  models.reserve(thetas.size());
  for (double th : thetas) {
    RateModel m = NmrRate{gamma, coupling, th};
    validate(m);
    models.push_back(m);
  }
  std::ostringstream os;
  os << "t";
  for (double th : thetas) os << ",gamma_theta_" << fmt("%.6g", th);
  os << "\n";
  for (int i = 0; i < samples; ++i) {
    const double t = t_end * i / (samples - 1);
    os << fmt("%.10g", t);
    for (const auto& m : models) os << ',' << fmt("%.12e", rate_at(m, t));
    os << "\n";
  }
  return os.str();
}

}  // namespace dephasim
