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

#ifndef DEPHASIM_METRICS_HPP
#define DEPHASIM_METRICS_HPP

#include <functional>
#include <optional>
#include <vector>

#include "dephasim/chain.hpp"
#include "dephasim/types.hpp"

namespace dephasim {

struct QuadratureConfig {
  double rel_tol = 1e-8;
  double abs_tol = 1e-14;
  int points_per_period = 200;  // initial subdivision density
  int max_depth = 40;
};

/// Steady-state figures of merit derived from a population vector.
struct ObservableSet {
  RVector populations;          // n_1..n_N
  double current = 0.0;         // J = kappa_ext * n_k
  double rescaled_current = 0.0;  // J / (kappa_ext N) = n_k / N
  double spread = 0.0;          // Delta_n
};

ObservableSet make_observables(const RVector& populations, const ChainSpec& spec);

/// (J, J-tilde) from steady-state populations: J = kappa_ext n_k,
/// J-tilde = n_k / N.
std::pair<double, double> exciton_current(const RVector& populations,
                                          const ChainSpec& spec);

/// Delta_n = 1 - (mean(n) - n_k)^2; maximal when the mean population matches
/// the extraction site.
double occupation_spread(const RVector& populations, int extraction_site);

/// f(t) = max(0, -gamma(t)): instantaneous non-Markovianity indicator.
double nm_indicator(const RateModel& model, double t);

/// F(t0, t1) = integral of f over [t0, t1] (adaptive quadrature).
double nm_quantifier(const RateModel& model, double t0, double t1,
                     const QuadratureConfig& quad = {});

/// Single-channel complete-positivity check: the running integral of
/// gamma must stay >= 0. Violations below -1e-10 are genuine; smaller dips
/// are numerical noise on boundary-touching models.
struct CpReport {
  bool valid = true;
  double first_violation_time = -1.0;  // < 0 when valid
  double min_integral = 0.0;
  double min_integral_time = 0.0;
  double horizon = 0.0;
};

CpReport cp_check_single_channel(const RateModel& model, double horizon,
                                 int points_per_period = 200);

/// Two-level Pauli-channel CP conditions at time t:
/// Gamma_j + Gamma_k <= 1 + Gamma_l for all permutations, with
/// Gamma_j = exp(-int_0^t (gamma_k + gamma_l)).
bool cp_check_pauli_channels(const std::function<double(double)>& gamma1,
                             const std::function<double(double)>& gamma2,
                             const std::function<double(double)>& gamma3,
                             double t, const QuadratureConfig& quad = {});

/// Adaptive-Simpson quadrature used by the checks above (exposed for tests).
double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureConfig& quad = {});

/// Minimum of gamma(t) over one fundamental period (dense grid plus
/// golden-section refinement).
double min_rate_over_period(const RateModel& model);

/// Base offset gamma at which min_t gamma(t) = 0: gamma0 for offset sines,
/// gamma - min_t gamma(t) for NMR, 0 for constants. Empty for pure sine
/// models (non-Markovian for every gamma > 0).
std::optional<double> markovian_crossover(const RateModel& model);

}  // namespace dephasim

#endif  // DEPHASIM_METRICS_HPP
