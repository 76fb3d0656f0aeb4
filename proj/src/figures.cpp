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

#include <stdexcept>

#include "dephasim/experiments.hpp"

namespace dephasim {

namespace {

// Benchmark chain used throughout: 7 sites, uniform omega, lambda = 0.1,
// injection at site 1 and extraction at site 5 (non-symmetric) or site 7
// (symmetric), kappa_inj = kappa_ext = 0.01.
ChainSpec bench_chain(bool symmetric) {
  return ChainSpec::uniform(7, 1.0, 0.1, 1, 0.01, symmetric ? 7 : 5, 0.01);
}

IntegratorConfig bench_integrator() {
  IntegratorConfig cfg;
  cfg.rtol = 1e-8;
  cfg.atol = 1e-10;
  // The slowest relaxation modes (edge extraction near gamma = 0) decay at
  // ~7e-4, so the horizon needs to be much longer than the library default.
  cfg.t_max = 30000.0;
  cfg.window_tol = 1e-7;
  return cfg;
}

ExperimentConfig make_curve(bool symmetric, const std::string& name,
                            RateModel model, const SweepSpec& sweep) {
  ExperimentConfig cfg;
  cfg.chain = bench_chain(symmetric);
  cfg.model = std::move(model);
  cfg.sweep = sweep;
  cfg.integrator = bench_integrator();
  cfg.name = name;
  cfg.output_path = name + ".csv";
  return cfg;
}

SweepSpec gamma_sweep(double max, int points = 25) {
  SweepSpec s;
  s.parameter = "gamma";
  s.min = 0.0;
  s.max = max;
  s.points = points;
  return s;
}

void add_sine_family(FigureBundle& fig, bool symmetric, const std::string& prefix) {
  fig.curves.push_back(make_curve(symmetric, prefix + "_constant",
                                  ConstantRate{0.0}, gamma_sweep(2.0)));
  for (double nu : {0.3, 2.0, 4.0}) {
    char name[64];
    std::snprintf(name, sizeof(name), "%s_sine_nu%g", prefix.c_str(), nu);
    fig.curves.push_back(make_curve(symmetric, name, SineRate{0.0, nu}, gamma_sweep(2.0)));
  }
  fig.curves.push_back(make_curve(symmetric, prefix + "_sine_sum",
                                  SineSumRate{0.0, {0.3, 2.0, 4.0}}, gamma_sweep(2.0)));
}

}  // namespace

FigureBundle figure_bundle(int number) {
  FigureBundle fig;
  fig.number = number;
  switch (number) {
    case 1: {
      fig.description =
          "non-symmetric configuration: J-tilde vs gamma for sine dephasing "
          "(nu = 0.3, 2, 4), their normalized sum, and the constant benchmark";
      add_sine_family(fig, false, "fig1_nonsym");
      break;
    }
    case 2: {
      fig.description =
          "non-symmetric configuration: J-tilde vs gamma for "
          "gamma(t) = gamma + sin(t), with the constant benchmark";
      fig.curves.push_back(make_curve(false, "fig2_nonsym_offset_sine",
                                      OffsetSineRate{0.0, 1.0, 1.0}, gamma_sweep(2.0)));
      fig.curves.push_back(make_curve(false, "fig2_nonsym_constant",
                                      ConstantRate{0.0}, gamma_sweep(2.0)));
      break;
    }
    case 3: {
      fig.description =
          "symmetric configuration (extraction at site 7): J-tilde vs gamma "
          "for the sine models, their normalized sum, and the constant benchmark";
      add_sine_family(fig, true, "fig3_sym");
      break;
    }
    case 4: {
      fig.description =
          "Delta_n and J-tilde vs gamma for each sine model in both "
          "configurations (Delta_n is a CSV column of every sweep)";
      for (double nu : {0.3, 2.0, 4.0}) {
        char name[64];
        std::snprintf(name, sizeof(name), "fig4_nonsym_sine_nu%g", nu);
        fig.curves.push_back(make_curve(false, name, SineRate{0.0, nu}, gamma_sweep(2.0)));
        std::snprintf(name, sizeof(name), "fig4_sym_sine_nu%g", nu);
        fig.curves.push_back(make_curve(true, name, SineRate{0.0, nu}, gamma_sweep(2.0)));
      }
      fig.curves.push_back(make_curve(false, "fig4_nonsym_sine_sum",
                                      SineSumRate{0.0, {0.3, 2.0, 4.0}}, gamma_sweep(2.0)));
      fig.curves.push_back(make_curve(true, "fig4_sym_sine_sum",
                                      SineSumRate{0.0, {0.3, 2.0, 4.0}}, gamma_sweep(2.0)));
      break;
    }
    case 5: {
      fig.description =
          "Delta_n and J-tilde vs gamma for gamma(t) = gamma + sin(t) in both "
          "configurations";
      fig.curves.push_back(make_curve(false, "fig5_nonsym_offset_sine",
                                      OffsetSineRate{0.0, 1.0, 1.0}, gamma_sweep(2.0)));
      fig.curves.push_back(make_curve(true, "fig5_sym_offset_sine",
                                      OffsetSineRate{0.0, 1.0, 1.0}, gamma_sweep(2.0)));
      break;
    }
    case 6: {
      fig.description =
          "NMR-engineered dephasing, gamma = 0, J = 1: J-tilde vs theta in "
          "both configurations";
      SweepSpec s;
      s.parameter = "theta";
      s.min = 0.0;
      s.max = 1.5;
      s.points = 25;
      fig.curves.push_back(make_curve(false, "fig6_nonsym_nmr_theta",
                                      NmrRate{0.0, 1.0, 0.0}, s));
      fig.curves.push_back(make_curve(true, "fig6_sym_nmr_theta",
                                      NmrRate{0.0, 1.0, 0.0}, s));
      break;
    }
    case 7: {
      fig.description =
          "NMR-engineered dephasing, theta = 0.52, J = 1: J-tilde vs gamma in "
          "both configurations, with the Markovian crossover marker";
      fig.curves.push_back(make_curve(false, "fig7_nonsym_nmr_gamma",
                                      NmrRate{0.0, 1.0, 0.52}, gamma_sweep(2.0)));
      fig.curves.push_back(make_curve(true, "fig7_sym_nmr_gamma",
                                      NmrRate{0.0, 1.0, 0.52}, gamma_sweep(2.0)));
      break;
    }
    default:
      throw std::invalid_argument(
          "figure_bundle: figures 1..7 are sweep bundles (figure 8 is the NMR "
          "rate time series)");
  }
  return fig;
}

}  // namespace dephasim
