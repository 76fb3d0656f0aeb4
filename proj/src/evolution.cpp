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

#include "dephasim/evolution.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace dephasim {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// b - b_hat (embedded 4th-order error weights).
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// Dense-output weights.
constexpr double d1 = -12715105075.0 / 11282082432.0;
constexpr double d3 = 87487479700.0 / 32700410799.0;
constexpr double d4 = -10690763975.0 / 1880347072.0;
constexpr double d5 = 701980252875.0 / 199316789632.0;
constexpr double d6 = -1453857185.0 / 822651844.0;
constexpr double d7 = 69997945.0 / 29380423.0;

// Antiderivatives of the interpolant basis
//   y(theta) = A + theta B + theta(1-theta) C + theta^2(1-theta) D
//            + theta^2(1-theta)^2 E.
struct BasisIntegrals {
  double pa, pb, pc, pd, pe;
  explicit BasisIntegrals(double th) {
    const double t2 = th * th, t3 = t2 * th, t4 = t3 * th, t5 = t4 * th;
    pa = th;
    pb = t2 / 2;
    pc = t2 / 2 - t3 / 3;
    pd = t3 / 3 - t4 / 4;
    pe = t3 / 3 - t4 / 2 + t5 / 5;
  }
};

double diag_sum(const CMatrix& m, const std::vector<int>& idx) {
  double s = 0.0;
  for (int a : idx) s += m(a, a).real();
  return s;
}

/// One adaptive Dormand-Prince 5(4) integrator bound to a generator.
/// Invariant projections (trace renormalization, Hermitian part) run after
/// every accepted step; drifts beyond the configured thresholds abort.
class Dopri5 {
 public:
  Dopri5(const GeneratorContext& ctx, const IntegratorConfig& cfg,
         DensityMatrix y0, double t0)
      : ctx_(ctx), cfg_(cfg), y_(std::move(y0)), t_(t0), h_next_(cfg.initial_step) {
    const int d = ctx.dim();
    if (y_.rows() != d || y_.cols() != d)
      throw std::invalid_argument("integrator: state dimension mismatch");
    for (auto& k : k_) k.resize(d, d);
    ytmp_.resize(d, d);
    k_[0] = apply_rhs(ctx_, y_, t_);  // also seeds FSAL
    y_prev_ = y_;
  }

  double t() const { return t_; }
  double t_prev() const { return t0_; }
  double h() const { return h_; }
  const DensityMatrix& state() const { return y_; }
  const DensityMatrix& state_prev() const { return y_prev_; }
  IntegratorStats& stats() { return stats_; }

  /// Take one accepted step with h <= t_end - t. Returns false when t_end
  /// has been reached (no step taken).
  bool advance(double t_end) {
    const double remaining = t_end - t_;
    if (remaining <= 1e-14 * std::max(1.0, std::abs(t_end))) {
      t_ = t_end;
      return false;
    }
    double h = std::min({h_next_, cfg_.max_step, remaining});
    bool rejected_once = false;
    for (;;) {
      if (h < cfg_.min_step) {
        std::ostringstream os;
        os << "integrator: step size underflow at t = " << t_ << " (h = " << h
           << "); the problem appears too stiff for the configured tolerances";
        throw IntegrationError(os.str());
      }
      const double err = attempt(h);
      const double fac = err > 0.0 ? 0.9 * std::pow(err, -0.2)
                                   : 5.0;
      if (err <= 1.0) {
        accept(h);
        double grow = std::clamp(fac, 0.2, rejected_once ? 1.0 : 5.0);
        h_next_ = h * grow;
        return true;
      }
      ++stats_.rejected;
      rejected_once = true;
      h *= std::clamp(fac, 0.2, 0.9);
    }
  }

  // Dense output is valid between an accepted step and the next advance()
  // call: k1 lives in k1_prev_, k3..k6 in k_[2..5], and k7 in the FSAL slot
  // k_[0].

  /// Scalar dense-output coefficients of a diagonal-mask functional over the
  /// last accepted step.
  std::array<double, 5> functional_rcont(const std::vector<int>& idx) const {
    const double f0 = diag_sum(y_prev_, idx);
    const double f1 = diag_sum(y_accept_, idx);
    const double fk1 = diag_sum(k1_prev_, idx);
    const double fk3 = diag_sum(k_[2], idx);
    const double fk4 = diag_sum(k_[3], idx);
    const double fk5 = diag_sum(k_[4], idx);
    const double fk6 = diag_sum(k_[5], idx);
    const double fk7 = diag_sum(k_[0], idx);
    const double dy = f1 - f0;
    return {f0, dy, h_ * fk1 - dy, 2.0 * dy - h_ * (fk1 + fk7),
            h_ * (d1 * fk1 + d3 * fk3 + d4 * fk4 + d5 * fk5 + d6 * fk6 + d7 * fk7)};
  }

  /// Matrix dense-output coefficients (for state averaging / sampling).
  std::array<CMatrix, 5> state_rcont() const {
    const CMatrix dy = y_accept_ - y_prev_;
    return {y_prev_, dy, h_ * k1_prev_ - dy,
            2.0 * dy - h_ * (k1_prev_ + k_[0]),
            h_ * (d1 * k1_prev_ + d3 * k_[2] + d4 * k_[3] + d5 * k_[4] +
                  d6 * k_[5] + d7 * k_[0])};
  }

  /// State at t_prev + theta * h, theta in [0, 1].
  CMatrix eval_dense(double theta) const {
    const double th = std::clamp(theta, 0.0, 1.0);
    const auto rc = state_rcont();
    return rc[0] + th * rc[1] + (th * (1.0 - th)) * rc[2] +
           (th * th * (1.0 - th)) * rc[3] +
           (th * th * (1.0 - th) * (1.0 - th)) * rc[4];
  }

  void check_positivity_now() {
    if (!cfg_.check_positivity) return;
    Eigen::MatrixXcd tmp = y_;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(tmp, Eigen::EigenvaluesOnly);
    const double min_eig = es.eigenvalues().minCoeff();
    stats_.min_eigenvalue = std::min(stats_.min_eigenvalue, min_eig);
    if (min_eig < cfg_.positivity_floor) {
      std::ostringstream os;
      os << "invariant violation at t = " << t_ << ": min eigenvalue "
         << min_eig << " below floor " << cfg_.positivity_floor;
      throw InvariantViolation(os.str());
    }
  }

 private:
  /// Computes stages and the error norm for a trial step of size h.
  double attempt(double h) {
    const double t = t_;
    ytmp_ = y_ + (h * a21) * k_[0];
    apply_rhs(ctx_, ytmp_, t + c2 * h, k_[1], ws_);
    ytmp_ = y_ + h * (a31 * k_[0] + a32 * k_[1]);
    apply_rhs(ctx_, ytmp_, t + c3 * h, k_[2], ws_);
    ytmp_ = y_ + h * (a41 * k_[0] + a42 * k_[1] + a43 * k_[2]);
    apply_rhs(ctx_, ytmp_, t + c4 * h, k_[3], ws_);
    ytmp_ = y_ + h * (a51 * k_[0] + a52 * k_[1] + a53 * k_[2] + a54 * k_[3]);
    apply_rhs(ctx_, ytmp_, t + c5 * h, k_[4], ws_);
    ytmp_ = y_ + h * (a61 * k_[0] + a62 * k_[1] + a63 * k_[2] + a64 * k_[3] +
                      a65 * k_[4]);
    apply_rhs(ctx_, ytmp_, t + h, k_[5], ws_);
    ynew_ = y_ + h * (b1 * k_[0] + b3 * k_[2] + b4 * k_[3] + b5 * k_[4] +
                      b6 * k_[5]);
    apply_rhs(ctx_, ynew_, t + h, k_[6], ws_);

    // Scaled RMS error over all matrix entries.
    const ptrdiff_t sz = static_cast<ptrdiff_t>(ctx_.dim()) * ctx_.dim();
    const Complex* p0 = k_[0].data();
    const Complex* p2 = k_[2].data();
    const Complex* p3 = k_[3].data();
    const Complex* p4 = k_[4].data();
    const Complex* p5 = k_[5].data();
    const Complex* p6 = k_[6].data();
    const Complex* py = y_.data();
    const Complex* pn = ynew_.data();
    double sum = 0.0;
    for (ptrdiff_t i = 0; i < sz; ++i) {
      const Complex err = h * (e1 * p0[i] + e3 * p2[i] + e4 * p3[i] +
                               e5 * p4[i] + e6 * p5[i] + e7 * p6[i]);
      const double sc =
          cfg_.atol + cfg_.rtol * std::max(std::abs(py[i]), std::abs(pn[i]));
      sum += std::norm(err) / (sc * sc);
    }
    return std::sqrt(sum / static_cast<double>(sz));
  }

  void accept(double h) {
    y_prev_.swap(y_);       // y_prev_ <- state at step start
    k1_prev_.swap(k_[0]);   // k1 of this step, kept for dense output
    y_accept_ = ynew_;      // unprojected end state, kept for dense output
    t0_ = t_;
    h_ = h;
    t_ += h;
    y_.swap(ynew_);
    ++stats_.accepted;
    stats_.last_step = h;

    // Trace renormalization and Hermitian projection. Both corrections stay
    // within integrator tolerance; drifts beyond the thresholds abort.
    const double tr = y_.trace().real();
    const double drift = std::abs(tr - 1.0);
    stats_.max_trace_drift = std::max(stats_.max_trace_drift, drift);
    if (track_unit_trace_ && drift > cfg_.trace_tol) {
      std::ostringstream os;
      os << "invariant violation at t = " << t_ << ": |Tr rho - 1| = " << drift
         << " exceeds " << cfg_.trace_tol;
      throw InvariantViolation(os.str());
    }
    if (track_unit_trace_ && tr != 0.0) y_ /= tr;

    const int d = ctx_.dim();
    double herm = 0.0;
    for (int a = 0; a < d; ++a) {
      herm = std::max(herm, std::abs(y_(a, a).imag()));
      for (int b = a + 1; b < d; ++b)
        herm = std::max(herm, std::abs(y_(a, b) - std::conj(y_(b, a))));
    }
    stats_.max_herm_residual = std::max(stats_.max_herm_residual, herm);
    if (herm > cfg_.herm_tol) {
      std::ostringstream os;
      os << "invariant violation at t = " << t_ << ": Hermiticity residual "
         << herm << " exceeds " << cfg_.herm_tol;
      throw InvariantViolation(os.str());
    }
    for (int a = 0; a < d; ++a) {
      y_(a, a) = Complex(y_(a, a).real(), 0.0);
      for (int b = a + 1; b < d; ++b) {
        const Complex avg = 0.5 * (y_(a, b) + std::conj(y_(b, a)));
        y_(a, b) = avg;
        y_(b, a) = std::conj(avg);
      }
    }
    // FSAL: k7 evaluated at the unprojected state; the projection is
    // O(1e-15) so the reuse stays far below the local tolerance.
    k_[0].swap(k_[6]);

    if (cfg_.check_positivity && ++steps_since_check_ >= cfg_.checkpoint_stride) {
      steps_since_check_ = 0;
      check_positivity_now();
    }
  }

 public:
  // evolve() integrates arbitrary Hermitian matrices in tests; unit-trace
  // tracking only makes sense for density matrices.
  void set_track_unit_trace(bool on) { track_unit_trace_ = on; }

 private:
  const GeneratorContext& ctx_;
  const IntegratorConfig& cfg_;
  DensityMatrix y_;
  DensityMatrix y_prev_;    // state at the start of the last accepted step
  DensityMatrix y_accept_;  // unprojected end state of the last accepted step
  CMatrix ynew_, ytmp_;
  std::array<CMatrix, 7> k_;
  CMatrix k1_prev_;  // k1 of the last accepted step (k_[0] is already FSAL'd)
  RhsWorkspace ws_;
  double t_ = 0.0, t0_ = 0.0, h_ = 0.0, h_next_ = 1e-3;
  int steps_since_check_ = 0;
  bool track_unit_trace_ = true;
  IntegratorStats stats_;
};

}  // namespace

void IntegratorConfig::validate() const {
  if (rtol <= 0.0 || atol <= 0.0)
    throw std::invalid_argument("IntegratorConfig: tolerances must be > 0");
  if (t_max <= 0.0) throw std::invalid_argument("IntegratorConfig: t_max must be > 0");
  if (initial_step <= 0.0 || max_step <= 0.0 || min_step <= 0.0)
    throw std::invalid_argument("IntegratorConfig: step bounds must be > 0");
  if (window_tol <= 0.0)
    throw std::invalid_argument("IntegratorConfig: window_tol must be > 0");
  if (probe_window <= 0.0)
    throw std::invalid_argument("IntegratorConfig: probe_window must be > 0");
}

DensityMatrix all_ground_state(const ChainSpec& spec) {
  const int d = spec.dim();
  DensityMatrix rho = DensityMatrix::Zero(d, d);
  rho(d - 1, d - 1) = 1.0;
  return rho;
}

namespace {

/// Steps must not span whole oscillation periods of gamma(t), or the error
/// estimator can alias the forcing and accept wrong steps.
IntegratorConfig cap_step_to_rate_period(const GeneratorContext& ctx,
                                         IntegratorConfig config) {
  if (!std::holds_alternative<ConstantRate>(ctx.model())) {
    const double t_fast = fastest_period(ctx.model(), config.probe_window);
    config.max_step = std::min(config.max_step, t_fast / 3.0);
  }
  return config;
}

}  // namespace

TrajectoryResult evolve(const GeneratorContext& ctx, const DensityMatrix& rho0,
                        double t0, double t1, const IntegratorConfig& config_in,
                        std::span<const double> sample_times) {
  const IntegratorConfig config = cap_step_to_rate_period(ctx, config_in);
  config.validate();
  if (t1 < t0) throw std::invalid_argument("evolve: t1 must be >= t0");

  TrajectoryResult result;
  Dopri5 stepper(ctx, config, rho0, t0);
  stepper.set_track_unit_trace(std::abs(rho0.trace().real() - 1.0) < 1e-6);

  size_t next_sample = 0;
  auto record_sample = [&](double t, const CMatrix& state) {
    result.times.push_back(t);
    result.populations.push_back(ctx.populations(state));
    result.purity.push_back(state.squaredNorm());
  };
  while (next_sample < sample_times.size() && sample_times[next_sample] <= t0) {
    record_sample(sample_times[next_sample], rho0);
    ++next_sample;
  }

  while (stepper.advance(t1)) {
    while (next_sample < sample_times.size() &&
           sample_times[next_sample] <= stepper.t() + 1e-14) {
      const double theta = (sample_times[next_sample] - stepper.t_prev()) / stepper.h();
      record_sample(sample_times[next_sample], stepper.eval_dense(theta));
      ++next_sample;
    }
  }
  stepper.check_positivity_now();

  result.final_state = stepper.state();
  result.final_time = stepper.t();
  result.stats = stepper.stats();
  return result;
}

SteadyStateResult find_steady_state(const GeneratorContext& ctx,
                                    const IntegratorConfig& config_in) {
  const IntegratorConfig config = cap_step_to_rate_period(ctx, config_in);
  config.validate();
  const ChainSpec& spec = ctx.spec();
  if (spec.injection_rate <= 0.0 && spec.extraction_rate <= 0.0)
    throw std::invalid_argument(
        "find_steady_state: needs an injection or extraction channel "
        "(no unique attractor otherwise)");

  const double period = fundamental_period(ctx.model(), config.probe_window);
  const int n = spec.n_sites;
  const auto& site_idx = ctx.tables().excited_indices;
  const int ext = spec.extraction_site - 1;

  SteadyStateResult result;
  result.window_length = period;
  result.populations = RVector::Zero(n);

  Dopri5 stepper(ctx, config, all_ground_state(spec), 0.0);

  RVector accum = RVector::Zero(n);
  CMatrix state_accum;
  if (config.track_state_average)
    state_accum = CMatrix::Zero(ctx.dim(), ctx.dim());

  int window = 0;
  double prev_pext = 0.0, prev_diff = -1.0;
  double prev_state_diff = -1.0;
  CMatrix prev_state_avg;
  bool have_prev = false, converged = false;

  while (!converged && stepper.advance(config.t_max)) {
    const double step_t0 = stepper.t_prev();
    const double step_t1 = stepper.t();
    const double h = stepper.h();

    std::vector<std::array<double, 5>> rc(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
      rc[static_cast<size_t>(i)] = stepper.functional_rcont(site_idx[static_cast<size_t>(i)]);
    std::array<CMatrix, 5> mrc;
    if (config.track_state_average) mrc = stepper.state_rcont();

    double pos = step_t0;
    while (pos < step_t1) {
      const double boundary = period * (window + 1);
      const double seg_end = std::min(boundary, step_t1);
      const BasisIntegrals lo((pos - step_t0) / h);
      const BasisIntegrals hi((seg_end - step_t0) / h);
      for (int i = 0; i < n; ++i) {
        const auto& c = rc[static_cast<size_t>(i)];
        accum(i) += h * (c[0] * (hi.pa - lo.pa) + c[1] * (hi.pb - lo.pb) +
                         c[2] * (hi.pc - lo.pc) + c[3] * (hi.pd - lo.pd) +
                         c[4] * (hi.pe - lo.pe));
      }
      if (config.track_state_average) {
        state_accum += h * ((hi.pa - lo.pa) * mrc[0] + (hi.pb - lo.pb) * mrc[1] +
                            (hi.pc - lo.pc) * mrc[2] + (hi.pd - lo.pd) * mrc[3] +
                            (hi.pe - lo.pe) * mrc[4]);
      }
      pos = seg_end;

      if (seg_end >= boundary - 1e-12 * period && seg_end <= step_t1) {
        // Window closed: test convergence on the averaged extraction-site
        // population, including the extrapolated geometric tail.
        ++window;
        result.populations = accum / period;
        result.p_ext = result.populations(ext);
        if (config.track_state_average) {
          result.averaged_state = state_accum / period;
          state_accum.setZero();
        }
        accum.setZero();

        if (have_prev) {
          const double diff = std::abs(result.p_ext - prev_pext);
          const double scale = std::max(std::abs(result.p_ext), 1e-12);
          result.residual = diff / scale;
          double tail = 0.0;
          if (prev_diff > 0.0) {
            const double ratio = std::clamp(diff / prev_diff, 0.0, 0.9995);
            tail = diff * ratio / (1.0 - ratio);
          }
          const double tol_abs = config.window_tol * scale + 1e-13;
          bool ok = window >= config.min_windows && diff <= tol_abs && tail <= tol_abs;
          if (ok && config.track_state_average) {
            // The averaged state itself must have settled, not just the
            // extraction-site population: the two can converge at different
            // amplitudes along the slowest mode.
            const double sdiff = (result.averaged_state - prev_state_avg).norm();
            double stail = 0.0;
            if (prev_state_diff > 0.0) {
              const double ratio = std::clamp(sdiff / prev_state_diff, 0.0, 0.9995);
              stail = sdiff * ratio / (1.0 - ratio);
            }
            ok = sdiff <= tol_abs && stail <= tol_abs;
          }
          converged = ok;
          prev_diff = diff;
        }
        if (config.track_state_average) {
          if (have_prev)
            prev_state_diff = (result.averaged_state - prev_state_avg).norm();
          prev_state_avg = result.averaged_state;
        }
        prev_pext = result.p_ext;
        have_prev = true;
      }
    }
  }

  stepper.check_positivity_now();
  result.converged = converged;
  result.windows_used = window;
  result.elapsed_time = stepper.t();
  result.stats = stepper.stats();
  return result;
}

DensityMatrix steady_state_nullspace(const GeneratorContext& ctx,
                                     double gamma_const, int max_sites_dense) {
  const ChainSpec& spec = ctx.spec();
  if (spec.n_sites > max_sites_dense) {
    std::ostringstream os;
    os << "steady_state_nullspace: n_sites = " << spec.n_sites
       << " exceeds the dense null-space cap of " << max_sites_dense;
    throw std::invalid_argument(os.str());
  }
  if (spec.injection_rate <= 0.0 && spec.extraction_rate <= 0.0)
    throw std::invalid_argument(
        "steady_state_nullspace: needs an injection or extraction channel");

  const int d = spec.dim();
  const Eigen::MatrixXcd l =
      Eigen::MatrixXcd(build_constant_superoperator(ctx, gamma_const, max_sites_dense));
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(l, Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const int m = static_cast<int>(sv.size());
  if (m >= 2 && sv(m - 2) < 1e-10 * sv(0))
    throw std::runtime_error(
        "steady_state_nullspace: degenerate null space (decoupled sector?)");

  CVector v = svd.matrixV().col(m - 1);
  CMatrix rho = unvec(v, d);
  // Rotate the arbitrary global phase so the trace is real and positive,
  // then project onto Hermitian unit-trace matrices.
  const Complex tr = rho.trace();
  if (std::abs(tr) < 1e-12)
    throw std::runtime_error("steady_state_nullspace: null vector has zero trace");
  rho *= std::conj(tr) / std::abs(tr);
  rho = 0.5 * (rho + rho.adjoint()).eval();
  rho /= rho.trace().real();

  const CMatrix resid =
      apply_rhs(ctx.with_model(ConstantRate{gamma_const}), rho, 0.0);
  const double rmax = resid.cwiseAbs().maxCoeff();
  if (rmax > 1e-8) {
    std::ostringstream os;
    os << "steady_state_nullspace: stationary residual " << rmax
       << " is unexpectedly large";
    throw std::runtime_error(os.str());
  }
  return rho;
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  Eigen::MatrixXcd diff = a - b;
  diff = 0.5 * (diff + diff.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(diff, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

}  // namespace dephasim
