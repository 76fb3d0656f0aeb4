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

#ifndef DEPHASIM_EVOLUTION_HPP
#define DEPHASIM_EVOLUTION_HPP

#include <span>
#include <stdexcept>
#include <vector>

#include "dephasim/liouvillian.hpp"
#include "dephasim/types.hpp"

namespace dephasim {

struct IntegrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
/// Trace, Hermiticity or positivity drifted past its threshold.
struct InvariantViolation : IntegrationError {
  using IntegrationError::IntegrationError;
};

struct IntegratorConfig {
  double rtol = 1e-8;
  double atol = 1e-10;
  double initial_step = 1e-3;
  double max_step = 1.0;
  double min_step = 1e-12;  // stiffness guard
  double t_max = 5000.0;    // hard horizon for steady-state searches

  // Steady-state windowing. Convergence requires both the consecutive
  // window-average difference and its extrapolated geometric tail to drop
  // below window_tol (relative to the averaged value).
  double window_tol = 1e-8;
  double probe_window = 10.0;  // window length for constant-rate models
  int min_windows = 3;
  bool track_state_average = false;

  // Invariant thresholds, checked after every accepted step; violations
  // abort the integration with a diagnostic.
  double trace_tol = 1e-9;
  double herm_tol = 1e-10;
  double positivity_floor = -1e-8;
  int checkpoint_stride = 400;  // accepted steps between eigenvalue checks
  bool check_positivity = true;

  void validate() const;
};

struct IntegratorStats {
  long accepted = 0;
  long rejected = 0;
  double last_step = 0.0;
  double max_trace_drift = 0.0;    // |Tr rho - 1| before renormalization
  double max_herm_residual = 0.0;  // max |rho - rho^dag| before projection
  double min_eigenvalue = 1.0;     // smallest eigenvalue seen at checkpoints
};

struct TrajectoryResult {
  std::vector<double> times;
  std::vector<RVector> populations;  // n_1..n_N at each sample time
  std::vector<double> purity;        // Tr rho^2 at each sample time
  DensityMatrix final_state;
  double final_time = 0.0;
  IntegratorStats stats;
};

struct SteadyStateResult {
  bool converged = false;
  double p_ext = 0.0;        // period-averaged extraction-site population
  RVector populations;       // period-averaged n_1..n_N
  int windows_used = 0;
  double residual = 0.0;     // last relative consecutive-window difference
  double window_length = 0.0;
  double elapsed_time = 0.0;
  DensityMatrix averaged_state;  // last-window average (track_state_average)
  IntegratorStats stats;
};

/// All-ground chain state |g...g><g...g| (basis index 2^N - 1).
DensityMatrix all_ground_state(const ChainSpec& spec);

/// Adaptive embedded Runge-Kutta 5(4) integration of the master equation
/// from t0 to t1. Observables are sampled on `sample_times` (must lie in
/// [t0, t1], ascending) through the integrator's dense output, so sampling
/// does not constrain step sizes.
TrajectoryResult evolve(const GeneratorContext& ctx, const DensityMatrix& rho0,
                        double t0, double t1, const IntegratorConfig& config,
                        std::span<const double> sample_times = {});

/// Integrates from the all-ground state and averages observables over
/// successive windows of one fundamental period of gamma(t) (the probe
/// window for constant rates) until consecutive window averages of the
/// extraction-site population agree to window_tol, including the
/// extrapolated geometric tail. Requires an injection or extraction channel.
SteadyStateResult find_steady_state(const GeneratorContext& ctx,
                                    const IntegratorConfig& config);

/// Algebraic steady state for a constant dephasing rate: the null vector of
/// the vectorized generator, via SVD. Throws if the null space is degenerate
/// or n_sites exceeds `max_sites_dense`.
DensityMatrix steady_state_nullspace(const GeneratorContext& ctx,
                                     double gamma_const,
                                     int max_sites_dense = 5);

/// Trace distance (1/2) ||a - b||_1 between two Hermitian states.
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

}  // namespace dephasim

#endif  // DEPHASIM_EVOLUTION_HPP
