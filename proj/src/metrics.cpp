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

#include "dephasim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dephasim {

namespace {

struct SimpsonState {
  const std::function<double(double)>* f;
  int max_depth;
  bool converged = true;
};

double simpson(double fa, double fm, double fb, double h) {
  return h / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson(SimpsonState& st, double a, double b, double fa,
                        double fm, double fb, double whole, double tol,
                        int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = (*st.f)(lm), frm = (*st.f)(rm);
  const double left = simpson(fa, flm, fm, m - a);
  const double right = simpson(fm, frm, fb, b - m);
  const double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol || depth >= st.max_depth) {
    if (depth >= st.max_depth && std::abs(delta) > 15.0 * tol) st.converged = false;
    return left + right + delta / 15.0;
  }
  return adaptive_simpson(st, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
         adaptive_simpson(st, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
}

double integrate_segments(const std::function<double(double)>& f, double a,
                          double b, int segments, const QuadratureConfig& quad) {
  // Rough scale pass to turn the relative tolerance into an absolute one.
  double scale = 0.0;
  for (int i = 0; i <= 4 * segments; ++i) {
    const double t = a + (b - a) * i / (4.0 * segments);
    scale += std::abs(f(t));
  }
  scale = scale / (4.0 * segments + 1.0) * (b - a);
  const double tol_total = std::max(quad.abs_tol, quad.rel_tol * scale);

  SimpsonState st{&f, quad.max_depth};
  double total = 0.0;
  for (int i = 0; i < segments; ++i) {
    const double sa = a + (b - a) * i / segments;
    const double sb = a + (b - a) * (i + 1) / segments;
    const double sm = 0.5 * (sa + sb);
    const double fa = f(sa), fm = f(sm), fb = f(sb);
    const double whole = simpson(fa, fm, fb, sb - sa);
    total += adaptive_simpson(st, sa, sb, fa, fm, fb, whole,
                              tol_total / segments, 0);
  }
  if (!st.converged)
    throw std::runtime_error("integrate: adaptive quadrature failed to converge");
  return total;
}

}  // namespace

ObservableSet make_observables(const RVector& populations, const ChainSpec& spec) {
  ObservableSet obs;
  obs.populations = populations;
  const auto [j, jt] = exciton_current(populations, spec);
  obs.current = j;
  obs.rescaled_current = jt;
  obs.spread = occupation_spread(populations, spec.extraction_site);
  return obs;
}

std::pair<double, double> exciton_current(const RVector& populations,
                                          const ChainSpec& spec) {
  if (populations.size() != spec.n_sites)
    throw std::invalid_argument("exciton_current: population vector size mismatch");
  const double n_k = populations(spec.extraction_site - 1);
  const double j = spec.extraction_rate * n_k;
  return {j, n_k / spec.n_sites};
}

double occupation_spread(const RVector& populations, int extraction_site) {
  if (extraction_site < 1 || extraction_site > populations.size())
    throw std::invalid_argument("occupation_spread: extraction site out of range");
  const double mean = populations.mean();
  const double dev = mean - populations(extraction_site - 1);
  return 1.0 - dev * dev;
}

double nm_indicator(const RateModel& model, double t) {
  return std::max(0.0, -rate_at(model, t));
}

double nm_quantifier(const RateModel& model, double t0, double t1,
                     const QuadratureConfig& quad) {
  if (t1 <= t0)
    throw std::invalid_argument("nm_quantifier: need t1 > t0");
  const double t_fast = fastest_period(model, /*probe_window=*/t1 - t0);
  const int segments = static_cast<int>(std::clamp(
      std::ceil((t1 - t0) / t_fast * 8.0), 4.0, 100000.0));
  auto f = [&model](double t) { return nm_indicator(model, t); };
  return integrate_segments(f, t0, t1, segments, quad);
}

CpReport cp_check_single_channel(const RateModel& model, double horizon,
                                 int points_per_period) {
  if (horizon <= 0.0)
    throw std::invalid_argument("cp_check_single_channel: horizon must be > 0");
  if (points_per_period < 8)
    throw std::invalid_argument("cp_check_single_channel: need >= 8 points per period");

  // Nodes aligned with the fundamental period so that boundary-touching
  // integrals (e.g. gamma sin: 1 - cos) hit their zeros exactly on nodes.
  const double t_fast = fastest_period(model, horizon);
  double dt = t_fast / points_per_period;
  constexpr long kMaxPoints = 2000000;
  long steps = static_cast<long>(std::ceil(horizon / dt));
  if (steps > kMaxPoints) {
    steps = kMaxPoints;
    dt = horizon / static_cast<double>(steps);
  }

  CpReport report;
  report.horizon = dt * static_cast<double>(steps);
  double integral = 0.0;
  double prev = rate_at(model, 0.0);
  report.min_integral = 0.0;
  report.min_integral_time = 0.0;
  constexpr double kViolation = -1e-10;
  for (long i = 1; i <= steps; ++i) {
    const double t = dt * static_cast<double>(i);
    const double cur = rate_at(model, t);
    integral += 0.5 * dt * (prev + cur);
    prev = cur;
    if (integral < report.min_integral) {
      report.min_integral = integral;
      report.min_integral_time = t;
    }
    if (report.valid && integral < kViolation) {
      report.valid = false;
      report.first_violation_time = t;
    }
  }
  return report;
}

bool cp_check_pauli_channels(const std::function<double(double)>& gamma1,
                             const std::function<double(double)>& gamma2,
                             const std::function<double(double)>& gamma3,
                             double t, const QuadratureConfig& quad) {
  if (t < 0.0)
    throw std::invalid_argument("cp_check_pauli_channels: t must be >= 0");
  if (t == 0.0) return true;  // identity map
  const double i1 = integrate(gamma1, 0.0, t, quad);
  const double i2 = integrate(gamma2, 0.0, t, quad);
  const double i3 = integrate(gamma3, 0.0, t, quad);
  const double g1 = std::exp(-(i2 + i3));
  const double g2 = std::exp(-(i1 + i3));
  const double g3 = std::exp(-(i1 + i2));
  constexpr double kSlack = 1e-12;
  return g1 + g2 <= 1.0 + g3 + kSlack && g2 + g3 <= 1.0 + g1 + kSlack &&
         g1 + g3 <= 1.0 + g2 + kSlack;
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureConfig& quad) {
  if (b <= a) throw std::invalid_argument("integrate: need b > a");
  const int segments = std::clamp(quad.points_per_period / 8, 4, 100000);
  return integrate_segments(f, a, b, segments, quad);
}

double min_rate_over_period(const RateModel& model) {
  if (const auto* c = std::get_if<ConstantRate>(&model)) return c->gamma;
  const double period = fundamental_period(model);
  const int n = 4096;
  double best_t = 0.0, best = rate_at(model, 0.0);
  for (int i = 1; i <= n; ++i) {
    const double t = period * i / n;
    const double v = rate_at(model, t);
    if (v < best) { best = v; best_t = t; }
  }
  // Golden-section refinement around the best node.
  double lo = best_t - period / n, hi = best_t + period / n;
  lo = std::max(lo, 0.0);
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = rate_at(model, x1), f2 = rate_at(model, x2);
  for (int it = 0; it < 200 && (hi - lo) > 1e-13 * period; ++it) {
    if (f1 < f2) {
      hi = x2; x2 = x1; f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = rate_at(model, x1);
    } else {
      lo = x1; x1 = x2; f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = rate_at(model, x2);
    }
  }
  return std::min({best, f1, f2});
}

std::optional<double> markovian_crossover(const RateModel& model) {
  if (std::holds_alternative<ConstantRate>(model)) return 0.0;
  if (std::holds_alternative<SineRate>(model) ||
      std::holds_alternative<SineSumRate>(model))
    return std::nullopt;
  if (const auto* o = std::get_if<OffsetSineRate>(&model)) return o->gamma0;
  const auto& nmr = std::get<NmrRate>(model);
  return nmr.gamma - min_rate_over_period(model);
}

}  // namespace dephasim
