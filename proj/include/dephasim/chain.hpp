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

#ifndef DEPHASIM_CHAIN_HPP
#define DEPHASIM_CHAIN_HPP

#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "dephasim/types.hpp"

namespace dephasim {

// Basis convention, fixed repo-wide:
//   - site 1 is the leftmost Kronecker factor (most significant bit of the
//     basis index), site N the rightmost (least significant bit);
//   - per site the basis is {excited, ground}, i.e. sigma^z = diag(+1, -1)
//     and bit value 0 means excited, bit value 1 means ground.
// The all-ground state is therefore the basis index 2^N - 1, and site i of a
// basis index a occupies bit (n_sites - i):  excited(i, a) <=> that bit is 0.

/// Static description of a linear first-neighbor chain with one incoherent
/// injection site and one incoherent extraction site. All rates and
/// frequencies are in units of the base frequency omega.
struct ChainSpec {
  int n_sites = 0;
  std::vector<double> frequencies;  // omega_i, size n_sites
  std::vector<double> couplings;    // lambda_i, size n_sites - 1
  int injection_site = 1;           // 1-based
  double injection_rate = 0.0;      // kappa_inj >= 0
  int extraction_site = 2;          // 1-based, != injection_site
  double extraction_rate = 0.0;     // kappa_ext >= 0

  // Hilbert-space dimension grows as 2^N; reject chains above this cap.
  int max_sites = 12;

  /// Uniform chain helper: omega_i = omega, lambda_i = lambda.
  static ChainSpec uniform(int n_sites, double omega, double lambda,
                           int injection_site, double injection_rate,
                           int extraction_site, double extraction_rate);

  int dim() const { return 1 << n_sites; }
  /// Bit position of site i (1-based) inside a basis index.
  int site_bit(int site) const { return n_sites - site; }

  /// Throws std::invalid_argument on any violated invariant.
  void validate() const;
};

// ---------------------------------------------------------------------------
// Time-dependent dephasing rate models. All sites share the same gamma(t).
// ---------------------------------------------------------------------------

struct ConstantRate {
  double gamma = 0.0;  // gamma(t) = gamma
};

struct SineRate {
  double gamma = 0.0;  // amplitude
  double nu = 1.0;     // gamma(t) = gamma * sin(nu t)
};

struct OffsetSineRate {
  double gamma = 0.0;   // offset
  double gamma0 = 1.0;  // oscillation amplitude
  double nu = 1.0;      // gamma(t) = gamma + gamma0 * sin(nu t)
};

struct SineSumRate {
  double gamma = 0.0;
  std::vector<double> frequencies;  // gamma(t) = (gamma/m) sum_j sin(nu_j t)
};

/// Engineered dephasing of an Ising-coupled two-level environment spin:
/// gamma(t) = gamma + pi J sin^2(2 theta) sin(2 pi J t) / den(t) and an
/// accompanying energy shift s(t) = 2 pi J cos(2 theta) / den(t), with
/// den(t) = 3 + 2 cos(4 theta) sin^2(pi J t) + cos(2 pi J t)
///        = 4 (1 - sin^2(2 theta) sin^2(pi J t)).
struct NmrRate {
  double gamma = 0.0;
  double coupling = 1.0;  // J
  double theta = 0.0;     // in [0, pi/2], theta != pi/4 (rate diverges)
};

using RateModel =
    std::variant<ConstantRate, SineRate, OffsetSineRate, SineSumRate, NmrRate>;

/// Throws std::invalid_argument for parameter combinations that are rejected
/// at construction time (NMR theta outside [0, pi/2] or equal to pi/4,
/// empty SineSum frequency list, non-positive frequencies).
void validate(const RateModel& model);

/// gamma(t) for the given model. May be negative (non-Markovian instants).
/// Throws std::domain_error if the NMR denominator vanishes.
double rate_at(const RateModel& model, double t);

/// Environment-induced energy shift s(t); NMR models only.
double shift_at(const NmrRate& model, double t);

/// True for variants that carry a shift term (NMR).
bool has_shift_term(const RateModel& model);

/// Fundamental period of gamma(t): 2 pi / nu for single sines, the least
/// common period for sine sums, 1/J for NMR. Constant rates have no period;
/// they use the supplied probe window.
double fundamental_period(const RateModel& model, double probe_window = 10.0);

/// Shortest period among the oscillatory components (== fundamental_period
/// except for sine sums). Used to size quadrature and sampling grids.
double fastest_period(const RateModel& model, double probe_window = 10.0);

/// Copy of `model` with the given parameter replaced. Valid combinations:
/// "gamma" for every variant, "nu" for Sine/OffsetSine, "theta" for NMR.
RateModel with_parameter(const RateModel& model, const std::string& parameter,
                         double value);

std::string model_name(const RateModel& model);

// ---------------------------------------------------------------------------
// Site-local operators, Kronecker-embedded into the 2^N space.
// ---------------------------------------------------------------------------

struct SiteOperatorSet {
  int n_sites = 0;
  std::vector<SparseOp> sz;          // sigma^z_i
  std::vector<SparseOp> sigma_plus;  // sigma^+_i (ground -> excited)
  std::vector<SparseOp> sigma_minus; // sigma^-_i = (sigma^+_i)^dagger
};

/// Builds sigma^z_i, sigma^+/-_i for all sites as 2^N-dimensional sparse
/// matrices with identity factors on the other sites.
SiteOperatorSet build_operators(const ChainSpec& spec);

/// H = sum_i (omega_i/2) sigma^z_i
///   + sum_i lambda_i (sigma^+_i sigma^-_{i+1} + sigma^+_{i+1} sigma^-_i).
SparseOp build_hamiltonian(const ChainSpec& spec, const SiteOperatorSet& ops);

/// Total number operator N-hat = sum_i sigma^+_i sigma^-_i (diagonal).
SparseOp build_number_operator(const ChainSpec& spec, const SiteOperatorSet& ops);

}  // namespace dephasim

#endif  // DEPHASIM_CHAIN_HPP
