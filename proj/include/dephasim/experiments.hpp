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

#ifndef DEPHASIM_EXPERIMENTS_HPP
#define DEPHASIM_EXPERIMENTS_HPP

#include <optional>
#include <string>
#include <vector>

#include "dephasim/evolution.hpp"
#include "dephasim/metrics.hpp"

namespace dephasim {

inline constexpr int kConfigSchemaVersion = 1;

struct SweepSpec {
  std::string parameter = "gamma";  // gamma | theta | nu
  double min = 0.0;
  double max = 1.0;
  int points = 25;
  std::string spacing = "linear";

  void validate() const;
  std::vector<double> grid() const;
};

/// One experiment: a chain, a rate model, a swept parameter and integrator
/// settings. Loaded from a versioned JSON document.
struct ExperimentConfig {
  ChainSpec chain;
  RateModel model = ConstantRate{0.0};
  SweepSpec sweep;
  IntegratorConfig integrator;
  std::string output_path = "sweep.csv";
  std::string name = "sweep";

  void validate() const;
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& json_text);
std::string config_to_json(const ExperimentConfig& cfg);

/// One (parameter point -> steady-state observables) row.
struct SweepRecord {
  double parameter = 0.0;
  double j_tilde = 0.0;
  double delta_n = 0.0;
  RVector populations;
  bool converged = false;
  int periods = 0;
  double nm_quantifier_period = 0.0;  // F over one fundamental period
  IntegratorStats stats;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
/// The rate model failed the complete-positivity pre-check.
struct CpViolationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Runs find_steady_state + metrics over the sweep grid. Points are
/// dispatched to an OpenMP worker pool (`threads` <= 0 uses the runtime
/// default); results are merged in parameter order and do not depend on the
/// thread count. Throws CpViolationError if any swept model fails the CP
/// check over the integration horizon. Per-point non-convergence is recorded
/// in the row, not fatal.
std::vector<SweepRecord> run_sweep(const ExperimentConfig& cfg, int threads = 0);

/// Fixed column order: parameter, J_tilde, Delta_n, n1..nN, converged,
/// periods, F. '.' decimal separator, one header row; byte-stable for
/// identical inputs.
void write_csv(const std::string& path, const std::vector<SweepRecord>& records,
               int n_sites);
std::string records_to_csv(const std::vector<SweepRecord>& records, int n_sites);

/// Argmax location, max value and monotonicity verdict for one sweep.
struct CurveSummary {
  std::string curve;
  double argmax_parameter = 0.0;
  int argmax_index = 0;
  double max_j_tilde = 0.0;
  double argmax_spread_parameter = 0.0;
  int argmax_spread_index = 0;
  std::string verdict;        // increasing | decreasing | interior-max | flat | non-monotonic
  int interior_extrema = 0;   // strict local extrema inside the grid
  bool all_converged = true;
  std::optional<double> markovian_crossover;
};

/// Comparison tolerance band of 1e-9 on J-tilde differences.
CurveSummary report_figure_summary(const std::vector<SweepRecord>& records,
                                   const std::string& curve_name = "",
                                   double tol = 1e-9);

std::string summaries_to_json(const std::vector<CurveSummary>& summaries);

// ---------------------------------------------------------------------------
// Bundled figure configurations (paper-reproduction pipelines).
// ---------------------------------------------------------------------------

struct FigureBundle {
  int number = 0;
  std::string description;
  std::vector<ExperimentConfig> curves;  // one sweep per curve
};

/// Bundled sweeps behind each figure (1..7). Figure 8 is the NMR rate-curve
/// time series and is handled by sample_nmr_rates below.
FigureBundle figure_bundle(int number);

/// gamma(t) samples for a list of NMR theta values (figure 8): returns CSV
/// text with columns t, gamma_theta_<v>...
std::string sample_nmr_rates(const std::vector<double>& thetas, double coupling,
                             double gamma, double t_end, int samples);

}  // namespace dephasim

#endif  // DEPHASIM_EXPERIMENTS_HPP
