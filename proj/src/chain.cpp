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

#include "dephasim/chain.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <sstream>

#include <unsupported/Eigen/KroneckerProduct>

namespace dephasim {

namespace {

constexpr double kPi = std::numbers::pi;

SparseOp sparse2x2(Complex a00, Complex a01, Complex a10, Complex a11) {
  SparseOp m(2, 2);
  std::vector<Eigen::Triplet<Complex>> trip;
  if (a00 != 0.0) trip.emplace_back(0, 0, a00);
  if (a01 != 0.0) trip.emplace_back(0, 1, a01);
  if (a10 != 0.0) trip.emplace_back(1, 0, a10);
  if (a11 != 0.0) trip.emplace_back(1, 1, a11);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

SparseOp sparse_identity(int n) {
  SparseOp id(n, n);
  id.setIdentity();
  return id;
}

/// I_{2^(site-1)} (x) op (x) I_{2^(N-site)}
SparseOp embed(const SparseOp& op, int site, int n_sites) {
  const SparseOp left = sparse_identity(1 << (site - 1));
  const SparseOp right = sparse_identity(1 << (n_sites - site));
  SparseOp mid = Eigen::kroneckerProduct(op, right).eval();
  SparseOp full = Eigen::kroneckerProduct(left, mid).eval();
  full.makeCompressed();
  return full;
}

/// Best rational approximation p/q of x with q <= max_den (continued
/// fractions). Returns false if x is not representable to rel_tol.
bool to_rational(double x, int64_t max_den, int64_t& p, int64_t& q,
                 double rel_tol = 1e-9) {
  int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double frac = x;
  for (int iter = 0; iter < 64; ++iter) {
    const double a_f = std::floor(frac);
    if (a_f > static_cast<double>(INT64_MAX / 4)) return false;
    const int64_t a = static_cast<int64_t>(a_f);
    const int64_t p2 = a * p1 + p0;
    const int64_t q2 = a * q1 + q0;
    if (q2 > max_den) break;
    p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    const double rem = frac - a_f;
    if (std::abs(static_cast<double>(p1) / q1 - x) <= rel_tol * std::abs(x)) {
      p = p1; q = q1;
      return true;
    }
    if (rem < 1e-15) break;
    frac = 1.0 / rem;
  }
  if (q1 >= 1 && std::abs(static_cast<double>(p1) / q1 - x) <= rel_tol * std::abs(x)) {
    p = p1; q = q1;
    return true;
  }
  return false;
}

double nmr_denominator(const NmrRate& m, double t) {
  const double beta = std::sin(2.0 * m.theta);
  const double s = std::sin(kPi * m.coupling * t);
  return 4.0 * (1.0 - beta * beta * s * s);
}

}  // namespace

ChainSpec ChainSpec::uniform(int n_sites, double omega, double lambda,
                             int injection_site, double injection_rate,
                             int extraction_site, double extraction_rate) {
  ChainSpec spec;
  spec.n_sites = n_sites;
  spec.frequencies.assign(static_cast<size_t>(n_sites), omega);
  spec.couplings.assign(n_sites > 0 ? static_cast<size_t>(n_sites - 1) : 0, lambda);
  spec.injection_site = injection_site;
  spec.injection_rate = injection_rate;
  spec.extraction_site = extraction_site;
  spec.extraction_rate = extraction_rate;
  return spec;
}

void ChainSpec::validate() const {
  if (n_sites < 1) throw std::invalid_argument("ChainSpec: n_sites must be >= 1");
  if (n_sites > max_sites) {
    std::ostringstream os;
    os << "ChainSpec: n_sites = " << n_sites << " exceeds the dimension cap of "
       << max_sites << " sites (2^N state space)";
    throw std::invalid_argument(os.str());
  }
  if (static_cast<int>(frequencies.size()) != n_sites)
    throw std::invalid_argument("ChainSpec: frequencies must have n_sites entries");
  if (static_cast<int>(couplings.size()) != n_sites - 1)
    throw std::invalid_argument("ChainSpec: couplings must have n_sites - 1 entries");
  if (injection_rate < 0.0 || extraction_rate < 0.0)
    throw std::invalid_argument("ChainSpec: injection/extraction rates must be >= 0");
  if (injection_site < 1 || injection_site > n_sites)
    throw std::invalid_argument("ChainSpec: injection_site out of range");
  if (extraction_site < 1 || extraction_site > n_sites)
    throw std::invalid_argument("ChainSpec: extraction_site out of range");
  // An inert extraction channel (rate 0) may sit anywhere, which keeps
  // single-site chains representable.
  if (extraction_rate > 0.0 && extraction_site == injection_site)
    throw std::invalid_argument("ChainSpec: extraction_site must differ from injection_site");
}

void validate(const RateModel& model) {
  std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, SineRate>) {
          if (m.nu <= 0.0) throw std::invalid_argument("SineRate: nu must be > 0");
        } else if constexpr (std::is_same_v<T, OffsetSineRate>) {
          if (m.nu <= 0.0) throw std::invalid_argument("OffsetSineRate: nu must be > 0");
        } else if constexpr (std::is_same_v<T, SineSumRate>) {
          if (m.frequencies.empty())
            throw std::invalid_argument("SineSumRate: frequency list must be non-empty");
          for (double nu : m.frequencies)
            if (nu <= 0.0) throw std::invalid_argument("SineSumRate: frequencies must be > 0");
        } else if constexpr (std::is_same_v<T, NmrRate>) {
          if (m.coupling <= 0.0) throw std::invalid_argument("NmrRate: J must be > 0");
          if (m.theta < 0.0 || m.theta > kPi / 2.0)
            throw std::invalid_argument("NmrRate: theta must lie in [0, pi/2]");
          // At theta = pi/4 the rate diverges as (pi J / 2) tan(pi J t);
          // capping it would silently change the physics, so reject it.
          if (m.theta == kPi / 4.0)
            throw std::invalid_argument("NmrRate: theta = pi/4 gives a divergent rate");
        }
      },
      model);
}

double rate_at(const RateModel& model, double t) {
  return std::visit(
      [t](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ConstantRate>) {
          return m.gamma;
        } else if constexpr (std::is_same_v<T, SineRate>) {
          return m.gamma * std::sin(m.nu * t);
        } else if constexpr (std::is_same_v<T, OffsetSineRate>) {
          return m.gamma + m.gamma0 * std::sin(m.nu * t);
        } else if constexpr (std::is_same_v<T, SineSumRate>) {
          double s = 0.0;
          for (double nu : m.frequencies) s += std::sin(nu * t);
          return m.gamma * s / static_cast<double>(m.frequencies.size());
        } else {
          const double den = nmr_denominator(m, t);
          if (std::abs(den) < 1e-12) {
            std::ostringstream os;
            os << "NmrRate: singular rate at t = " << t << " (denominator " << den << ")";
            throw std::domain_error(os.str());
          }
          const double beta = std::sin(2.0 * m.theta);
          return m.gamma + kPi * m.coupling * beta * beta *
                               std::sin(2.0 * kPi * m.coupling * t) / den;
        }
      },
      model);
}

double shift_at(const NmrRate& model, double t) {
  const double den = nmr_denominator(model, t);
  if (std::abs(den) < 1e-12) {
    std::ostringstream os;
    os << "NmrRate: singular shift at t = " << t;
    throw std::domain_error(os.str());
  }
  return 2.0 * kPi * model.coupling * std::cos(2.0 * model.theta) / den;
}

bool has_shift_term(const RateModel& model) {
  return std::holds_alternative<NmrRate>(model);
}

double fundamental_period(const RateModel& model, double probe_window) {
  return std::visit(
      [probe_window](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ConstantRate>) {
          return probe_window;
        } else if constexpr (std::is_same_v<T, SineRate>) {
          return 2.0 * kPi / m.nu;
        } else if constexpr (std::is_same_v<T, OffsetSineRate>) {
          return 2.0 * kPi / m.nu;
        } else if constexpr (std::is_same_v<T, SineSumRate>) {
          // Least common period of 2 pi / nu_j: write nu_j = p_j / q_j, the
          // common period is 2 pi * lcm(q_j) / gcd(p_j).
          int64_t gcd_p = 0, lcm_q = 1;
          bool exact = true;
          for (double nu : m.frequencies) {
            int64_t p = 0, q = 1;
            if (!to_rational(nu, 1000000, p, q)) { exact = false; break; }
            gcd_p = std::gcd(gcd_p, p);
            const int64_t g = std::gcd(lcm_q, q);
            if (lcm_q > (INT64_MAX / 4) / (q / g)) { exact = false; break; }
            lcm_q = lcm_q / g * q;
          }
          if (exact && gcd_p > 0) {
            const double period = 2.0 * kPi * static_cast<double>(lcm_q) /
                                  static_cast<double>(gcd_p);
            if (period < 1e6) return period;
          }
          // Incommensurate frequencies: fall back to a long pseudo-period of
          // the slowest component.
          double nu_min = m.frequencies.front();
          for (double nu : m.frequencies) nu_min = std::min(nu_min, nu);
          return 32.0 * 2.0 * kPi / nu_min;
        } else {
          return 1.0 / m.coupling;
        }
      },
      model);
}

double fastest_period(const RateModel& model, double probe_window) {
  if (const auto* s = std::get_if<SineSumRate>(&model)) {
    double nu_max = s->frequencies.front();
    for (double nu : s->frequencies) nu_max = std::max(nu_max, nu);
    return 2.0 * kPi / nu_max;
  }
  return fundamental_period(model, probe_window);
}

RateModel with_parameter(const RateModel& model, const std::string& parameter,
                         double value) {
  RateModel out = model;
  if (parameter == "gamma") {
    std::visit([value](auto& m) { m.gamma = value; }, out);
    return out;
  }
  if (parameter == "nu") {
    if (auto* s = std::get_if<SineRate>(&out)) { s->nu = value; return out; }
    if (auto* o = std::get_if<OffsetSineRate>(&out)) { o->nu = value; return out; }
    throw std::invalid_argument("parameter 'nu' applies to sine and offset_sine models only");
  }
  if (parameter == "theta") {
    if (auto* n = std::get_if<NmrRate>(&out)) { n->theta = value; return out; }
    throw std::invalid_argument("parameter 'theta' applies to nmr models only");
  }
  throw std::invalid_argument("unknown sweep parameter '" + parameter + "'");
}

std::string model_name(const RateModel& model) {
  return std::visit(
      [](const auto& m) -> std::string {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ConstantRate>) return "constant";
        else if constexpr (std::is_same_v<T, SineRate>) return "sine";
        else if constexpr (std::is_same_v<T, OffsetSineRate>) return "offset_sine";
        else if constexpr (std::is_same_v<T, SineSumRate>) return "sine_sum";
        else return "nmr";
      },
      model);
}

SiteOperatorSet build_operators(const ChainSpec& spec) {
  spec.validate();
  SiteOperatorSet ops;
  ops.n_sites = spec.n_sites;
  const SparseOp sz2 = sparse2x2(1.0, 0.0, 0.0, -1.0);
  const SparseOp sp2 = sparse2x2(0.0, 1.0, 0.0, 0.0);  // |e><g|
  const SparseOp sm2 = sparse2x2(0.0, 0.0, 1.0, 0.0);  // |g><e|
  ops.sz.reserve(spec.n_sites);
  ops.sigma_plus.reserve(spec.n_sites);
  ops.sigma_minus.reserve(spec.n_sites);
  for (int i = 1; i <= spec.n_sites; ++i) {
    ops.sz.push_back(embed(sz2, i, spec.n_sites));
    ops.sigma_plus.push_back(embed(sp2, i, spec.n_sites));
    ops.sigma_minus.push_back(embed(sm2, i, spec.n_sites));
  }
  return ops;
}

SparseOp build_hamiltonian(const ChainSpec& spec, const SiteOperatorSet& ops) {
  spec.validate();
  const int d = spec.dim();
  SparseOp h(d, d);
  for (int i = 0; i < spec.n_sites; ++i)
    h += (0.5 * spec.frequencies[static_cast<size_t>(i)]) * ops.sz[static_cast<size_t>(i)];
  for (int i = 0; i < spec.n_sites - 1; ++i) {
    const double lam = spec.couplings[static_cast<size_t>(i)];
    if (lam == 0.0) continue;
    const SparseOp up =
        ops.sigma_plus[static_cast<size_t>(i)] * ops.sigma_minus[static_cast<size_t>(i + 1)];
    const SparseOp down =
        ops.sigma_plus[static_cast<size_t>(i + 1)] * ops.sigma_minus[static_cast<size_t>(i)];
    h += lam * up;
    h += lam * down;
  }
  h.prune(Complex(1.0), 0.0);  // drop exact zeros from cancelling sums
  h.makeCompressed();
  return h;
}

SparseOp build_number_operator(const ChainSpec& spec, const SiteOperatorSet& ops) {
  const int d = spec.dim();
  SparseOp n(d, d);
  for (int i = 0; i < spec.n_sites; ++i) {
    const SparseOp proj =
        ops.sigma_plus[static_cast<size_t>(i)] * ops.sigma_minus[static_cast<size_t>(i)];
    n += proj;
  }
  n.makeCompressed();
  return n;
}

}  // namespace dephasim
