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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "dephasim/experiments.hpp"

namespace fs = std::filesystem;
using namespace dephasim;

namespace {

// Exit codes: 0 success, 1 config/CP errors, 2 non-converged sweep points.
constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kNotConverged = 2;

struct CommonOpts {
  std::string config_path;
  std::string out_path;
  int threads = 0;
  std::optional<double> t_max;
  std::optional<double> rtol;
};

void apply_overrides(ExperimentConfig& cfg, const CommonOpts& opts) {
  if (opts.t_max) cfg.integrator.t_max = *opts.t_max;
  if (opts.rtol) cfg.integrator.rtol = *opts.rtol;
  if (!opts.out_path.empty()) cfg.output_path = opts.out_path;
}

int run_one_sweep(const ExperimentConfig& cfg, int threads,
                  std::vector<CurveSummary>& summaries) {
  std::fprintf(stderr, "sweep '%s': %d points of %s in [%g, %g]\n",
               cfg.name.c_str(), cfg.sweep.points, cfg.sweep.parameter.c_str(),
               cfg.sweep.min, cfg.sweep.max);
  const auto records = run_sweep(cfg, threads);
  write_csv(cfg.output_path, records, cfg.chain.n_sites);
  auto summary = report_figure_summary(records, cfg.name);
  summary.markovian_crossover = markovian_crossover(cfg.model);
  summaries.push_back(summary);
  int bad = 0;
  for (const auto& r : records)
    if (!r.converged) ++bad;
  std::fprintf(stderr, "  -> %s (argmax %s = %g, max J~ = %.6g, %s%s)\n",
               cfg.output_path.c_str(), cfg.sweep.parameter.c_str(),
               summary.argmax_parameter, summary.max_j_tilde,
               summary.verdict.c_str(),
               bad ? ", NOT all points converged" : "");
  return bad ? kNotConverged : kOk;
}

int cmd_validate(const CommonOpts& opts) {
  const ExperimentConfig cfg = load_config(opts.config_path);
  const double horizon = opts.t_max.value_or(cfg.integrator.t_max);
  bool all_valid = true;
  for (double v : cfg.sweep.grid()) {
    const RateModel m = with_parameter(cfg.model, cfg.sweep.parameter, v);
    validate(m);
    const CpReport rep = cp_check_single_channel(m, horizon);
    if (!rep.valid) {
      std::printf("%s = %-10g  CP-INVALID  first violation t = %g (integral %g)\n",
                  cfg.sweep.parameter.c_str(), v, rep.first_violation_time,
                  rep.min_integral);
      all_valid = false;
    } else {
      std::printf("%s = %-10g  CP-valid    min running integral %.3e at t = %g\n",
                  cfg.sweep.parameter.c_str(), v, rep.min_integral,
                  rep.min_integral_time);
    }
  }
  std::printf(all_valid ? "all %d sweep points pass the CP check over [0, %g]\n"
                        : "CP violations found over [0, %g]\n",
              cfg.sweep.points, horizon);
  return all_valid ? kOk : kConfigError;
}

int cmd_sweep(const CommonOpts& opts, const std::string& summary_path) {
  ExperimentConfig cfg = load_config(opts.config_path);
  apply_overrides(cfg, opts);
  std::vector<CurveSummary> summaries;
  const int rc = run_one_sweep(cfg, opts.threads, summaries);
  if (!summary_path.empty()) {
    std::ofstream out(summary_path);
    out << summaries_to_json(summaries);
  }
  return rc;
}

int cmd_figure(int number, const CommonOpts& opts, const std::string& out_dir) {
  fs::create_directories(out_dir);
  if (number == 8) {
    // NMR dephasing-rate time series for several theta values.
    const std::string csv = sample_nmr_rates({0.1, 0.3, 0.52, 0.8, 1.1, 1.4},
                                             1.0, 0.0, 3.0, 601);
    const fs::path path = fs::path(out_dir) / "fig8_nmr_rates.csv";
    std::ofstream out(path, std::ios::binary);
    out << csv;
    std::fprintf(stderr, "wrote %s\n", path.string().c_str());
    return kOk;
  }
  FigureBundle fig = figure_bundle(number);
  std::fprintf(stderr, "figure %d: %s\n", fig.number, fig.description.c_str());
  int rc = kOk;
  std::vector<CurveSummary> summaries;
  for (auto& curve : fig.curves) {
    apply_overrides(curve, opts);
    curve.output_path = (fs::path(out_dir) / (curve.name + ".csv")).string();
    rc = std::max(rc, run_one_sweep(curve, opts.threads, summaries));
  }
  const fs::path spath =
      fs::path(out_dir) / ("fig" + std::to_string(number) + "_summary.json");
  std::ofstream out(spath);
  out << summaries_to_json(summaries);
  std::fprintf(stderr, "wrote %s\n", spath.string().c_str());
  return rc;
}

int cmd_oracle(const CommonOpts& opts) {
  // Small-N cross-check between time integration and the null-space solve.
  std::vector<ExperimentConfig> cases;
  if (!opts.config_path.empty()) {
    cases.push_back(load_config(opts.config_path));
  } else {
    for (int n : {2, 3, 4}) {
      ExperimentConfig cfg;
      cfg.chain = ChainSpec::uniform(n, 1.0, 0.1, 1, 0.01, n, 0.01);
      cfg.model = ConstantRate{0.0};
      cfg.name = "oracle_n" + std::to_string(n);
      cases.push_back(cfg);
    }
  }
  bool ok = true;
  for (const auto& cse : cases) {
    if (!std::holds_alternative<ConstantRate>(cse.model)) {
      std::fprintf(stderr, "oracle: requires a constant rate model\n");
      return kConfigError;
    }
    for (double gamma : {0.0, 0.05, 0.5}) {
      GeneratorContext ctx(cse.chain, ConstantRate{gamma});
      IntegratorConfig icfg = cse.integrator;
      icfg.rtol = std::min(icfg.rtol, 1e-10);
      icfg.atol = std::min(icfg.atol, 1e-13);
      icfg.window_tol = std::min(icfg.window_tol, 1e-9);
      icfg.track_state_average = true;
      const auto ss = find_steady_state(ctx, icfg);
      const auto oracle = steady_state_nullspace(ctx, gamma);
      const double dist =
          ss.converged ? trace_distance(ss.averaged_state, oracle) : 1.0;
      const bool pass = ss.converged && dist <= 1e-8;
      std::printf("N=%d gamma=%.2f: trace distance %.3e %s\n", cse.chain.n_sites,
                  gamma, dist, pass ? "OK" : "MISMATCH");
      ok = ok && pass;
    }
  }
  return ok ? kOk : kNotConverged;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "dephasim: steady-state exciton transport under time-dependent dephasing"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string summary_path, out_dir = ".";
  int figure_number = 1;

  auto add_common = [&opts](CLI::App* cmd, bool config_required) {
    auto* c = cmd->add_option("--config", opts.config_path, "JSON experiment config");
    if (config_required) c->required();
    cmd->add_option("--threads", opts.threads,
                    "sweep worker threads (0 = runtime default)");
    cmd->add_option("--tmax", opts.t_max, "override integration horizon");
    cmd->add_option("--rtol", opts.rtol, "override relative tolerance");
  };

  auto* validate_cmd = app.add_subcommand(
      "validate", "complete-positivity check of the configured sweep");
  add_common(validate_cmd, true);

  auto* sweep_cmd =
      app.add_subcommand("sweep", "run one parameter sweep, write CSV");
  add_common(sweep_cmd, true);
  sweep_cmd->add_option("--out", opts.out_path, "output CSV path (overrides config)");
  sweep_cmd->add_option("--summary", summary_path, "also write a JSON curve summary");

  auto* figure_cmd = app.add_subcommand(
      "figure", "run the bundled sweeps behind one figure (1-8)");
  figure_cmd->add_option("number", figure_number, "figure number")->required();
  add_common(figure_cmd, false);
  figure_cmd->add_option("--out", out_dir, "output directory");

  auto* oracle_cmd = app.add_subcommand(
      "oracle", "small-N cross-check: integration vs null space");
  add_common(oracle_cmd, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate_cmd->parsed()) return cmd_validate(opts);
    if (sweep_cmd->parsed()) return cmd_sweep(opts, summary_path);
    if (figure_cmd->parsed()) return cmd_figure(figure_number, opts, out_dir);
    if (oracle_cmd->parsed()) return cmd_oracle(opts);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const CpViolationError& e) {
    std::fprintf(stderr, "CP error: %s\n", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kConfigError;
  }
  return kOk;
}
