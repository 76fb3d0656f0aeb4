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

#include <cmath>
#include <numbers>

#include <doctest.h>

#include "dephasim/evolution.hpp"
#include "test_util.hpp"

using namespace dephasim;
using dephasim::testing::random_state;

namespace {

constexpr double kPi = std::numbers::pi;

IntegratorConfig tight() {
  IntegratorConfig cfg;
  cfg.rtol = 1e-10;
  cfg.atol = 1e-13;
  cfg.window_tol = 1e-9;
  return cfg;
}

}  // namespace

TEST_SUITE("evolution") {

TEST_CASE("unitary evolution conserves purity over t = 100") {
  auto spec = ChainSpec::uniform(3, 1.0, 0.1, 1, 0.0, 2, 0.0);
  GeneratorContext ctx(spec, ConstantRate{0.0});
  // pure state: rank-one projector
  CMatrix rho = CMatrix::Zero(8, 8);
  CVector psi = CVector::Zero(8);
  psi(7) = std::sqrt(0.5);
  psi(3) = std::sqrt(0.3);
  psi(5) = Complex(0.0, std::sqrt(0.2));
  rho = psi * psi.adjoint();

  IntegratorConfig cfg;
  cfg.rtol = 1e-9;
  cfg.atol = 1e-12;
  // A pure state has zero eigenvalues, so the positivity checkpoint would
  // sit exactly on its noise floor; purity is the meaningful check here.
  cfg.check_positivity = false;
  std::vector<double> samples;
  for (int i = 0; i <= 20; ++i) samples.push_back(5.0 * i);
  const auto traj = evolve(ctx, rho, 0.0, 100.0, cfg, samples);
  REQUIRE(traj.purity.size() == samples.size());
  for (double p : traj.purity) CHECK(p == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("single-site injection matches the closed-form rate equation") {
  // p_exc(t) = 1 - exp(-kappa t) from the all-ground state.
  const double kappa = 0.05;
  auto spec = ChainSpec::uniform(1, 1.0, 0.0, 1, kappa, 1, 0.0);
  GeneratorContext ctx(spec, ConstantRate{0.0});
  std::vector<double> samples = {0.0, 5.0, 20.0, 60.0, 100.0};
  const auto traj =
      evolve(ctx, all_ground_state(spec), 0.0, 100.0, tight(), samples);
  for (size_t i = 0; i < samples.size(); ++i) {
    const double expect = 1.0 - std::exp(-kappa * samples[i]);
    CHECK(traj.populations[i](0) == doctest::Approx(expect).epsilon(1e-8));
  }
}

TEST_CASE("halving rtol changes the final state by less than the coarse tolerance") {
  auto spec = ChainSpec::uniform(2, 1.0, 0.1, 1, 0.01, 2, 0.01);
  GeneratorContext ctx(spec, SineRate{0.1, 1.0});
  IntegratorConfig coarse;
  coarse.rtol = 1e-6;
  coarse.atol = 1e-9;
  IntegratorConfig fine = coarse;
  fine.rtol = 5e-7;
  const auto a = evolve(ctx, all_ground_state(spec), 0.0, 50.0, coarse);
  const auto b = evolve(ctx, all_ground_state(spec), 0.0, 50.0, fine);
  CHECK((a.final_state - b.final_state).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("invariant statistics stay within thresholds") {
  // Constant positive rate: a genuine Lindblad semigroup, so positivity must
  // hold along the whole trajectory.
  auto spec = ChainSpec::uniform(3, 1.0, 0.1, 1, 0.01, 3, 0.01);
  GeneratorContext ctx(spec, ConstantRate{0.3});
  IntegratorConfig cfg;
  cfg.checkpoint_stride = 50;
  const auto traj = evolve(ctx, all_ground_state(spec), 0.0, 200.0, cfg);
  CHECK(traj.stats.max_trace_drift <= 1e-9);
  CHECK(traj.stats.max_herm_residual <= 1e-10);
  CHECK(traj.stats.min_eigenvalue >= -1e-8);
  CHECK(traj.stats.accepted > 0);
}

TEST_CASE("invariant violation aborts with a diagnostic") {
  auto spec = ChainSpec::uniform(2, 1.0, 0.1, 1, 0.01, 2, 0.01);
  GeneratorContext ctx(spec, ConstantRate{0.1});
  IntegratorConfig cfg;
  cfg.positivity_floor = 0.2;  // impossible for any valid state
  cfg.checkpoint_stride = 5;
  CHECK_THROWS_AS(evolve(ctx, all_ground_state(spec), 0.0, 10.0, cfg),
                  InvariantViolation);
}

TEST_CASE("steady state requires an open channel") {
  auto spec = ChainSpec::uniform(2, 1.0, 0.1, 1, 0.0, 2, 0.0);
  GeneratorContext ctx(spec, ConstantRate{0.1});
  CHECK_THROWS_AS(find_steady_state(ctx, tight()), std::invalid_argument);
}

TEST_CASE("nothing injected: extraction-site population relaxes to zero") {
  auto spec = ChainSpec::uniform(2, 1.0, 0.1, 1, 0.0, 2, 0.01);
  GeneratorContext ctx(spec, ConstantRate{0.3});
  const auto ss = find_steady_state(ctx, tight());
  CHECK(ss.converged);
  CHECK(ss.p_ext == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("non-convergence inside a short horizon is reported, not thrown") {
  auto spec = ChainSpec::uniform(3, 1.0, 0.1, 1, 0.01, 3, 0.01);
  GeneratorContext ctx(spec, ConstantRate{0.0});
  auto cfg = tight();
  cfg.t_max = 35.0;  // three probe windows: far too short to relax at kappa = 0.01
  const auto ss = find_steady_state(ctx, cfg);
  CHECK_FALSE(ss.converged);
  CHECK(ss.windows_used >= 1);
}

TEST_CASE("nullspace steady state is a valid state satisfying the balance identity") {
  auto spec = ChainSpec::uniform(3, 1.0, 0.1, 1, 0.01, 2, 0.01);
  GeneratorContext ctx(spec, ConstantRate{0.05});
  const DensityMatrix rho = steady_state_nullspace(ctx, 0.05);

  CHECK(rho.trace().real() == doctest::Approx(1.0).epsilon(1e-12));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Eigen::MatrixXcd(rho),
                                                     Eigen::EigenvaluesOnly);
  CHECK(es.eigenvalues().minCoeff() >= -1e-10);

  // Stationarity: Tr[N L_inj rho] = -Tr[N L_ext rho].
  const auto& ops = ctx.ops();
  const CMatrix nop = CMatrix(ctx.number_op());
  auto dissipator = [&rho](const SparseOp& l, double rate) {
    const SparseOp ldl = SparseOp(l.adjoint()) * l;
    return (rate * (CMatrix(l * rho * SparseOp(l.adjoint())) -
                    0.5 * (CMatrix(ldl * rho) + CMatrix(rho * ldl))))
        .eval();
  };
  const double inj = (nop * dissipator(ops.sigma_plus[0], 0.01)).trace().real();
  const double ext = (nop * dissipator(ops.sigma_minus[1], 0.01)).trace().real();
  CHECK(inj == doctest::Approx(-ext).epsilon(1e-10));
  CHECK(inj > 0.0);

  // And the generator annihilates it.
  CHECK(apply_rhs(ctx, rho, 0.0).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("nullspace solver rejects oversized chains") {
  auto spec = ChainSpec::uniform(6, 1.0, 0.1, 1, 0.01, 4, 0.01);
  GeneratorContext ctx(spec, ConstantRate{0.0});
  CHECK_THROWS_AS(steady_state_nullspace(ctx, 0.0, 5), std::invalid_argument);
}

TEST_CASE("oracle equivalence: integration matches the null-space steady state") {
  for (int n : {2, 3}) {
    for (double gamma : {0.0, 0.5}) {
      auto spec = ChainSpec::uniform(n, 1.0, 0.1, 1, 0.01, n, 0.01);
      GeneratorContext ctx(spec, ConstantRate{gamma});
      auto cfg = tight();
      cfg.track_state_average = true;
      const auto ss = find_steady_state(ctx, cfg);
      REQUIRE(ss.converged);
      const DensityMatrix oracle = steady_state_nullspace(ctx, gamma);
      const double dist = trace_distance(ss.averaged_state, oracle);
      CAPTURE(n);
      CAPTURE(gamma);
      CHECK(dist <= 1e-8);
    }
  }
}

TEST_CASE("sign-changing rates drive the state transiently non-positive") {
  // The single-channel CP criterion (nonnegative running integral of gamma)
  // does not transfer to the chain: the hopping does not commute with the
  // local sigma^z channels, so negative-rate episodes leave real negativity
  // in rho. This is a property of the equation, not of the integrator; the
  // dip converges as the tolerance is tightened.
  auto spec = ChainSpec::uniform(3, 1.0, 0.1, 1, 0.01, 3, 0.01);
  GeneratorContext ctx(spec, SineRate{0.1, 1.0});
  double dips[2];
  int i = 0;
  for (double rtol : {1e-8, 1e-11}) {
    IntegratorConfig cfg;
    cfg.rtol = rtol;
    cfg.atol = rtol * 1e-2;
    cfg.check_positivity = false;
    const auto traj = evolve(ctx, all_ground_state(spec), 0.0, 17.5, cfg);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
        Eigen::MatrixXcd(traj.final_state), Eigen::EigenvaluesOnly);
    dips[i++] = es.eigenvalues().minCoeff();
  }
  CHECK(dips[0] < -1e-4);
  CHECK(dips[0] == doctest::Approx(dips[1]).epsilon(1e-5));
}

TEST_CASE("trace distance between orthogonal pure states is 1") {
  CMatrix a = CMatrix::Zero(2, 2), b = CMatrix::Zero(2, 2);
  a(0, 0) = 1.0;
  b(1, 1) = 1.0;
  CHECK(trace_distance(a, b) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(trace_distance(a, a) == doctest::Approx(0.0));
}

TEST_CASE("period-averaged current is insensitive to the averaging-window phase") {
  // Periodic steady state: averaging over [t_c, t_c + T] and over the
  // shifted window [t_c + T/3, t_c + 4T/3] must agree.
  auto spec = ChainSpec::uniform(7, 1.0, 0.1, 1, 0.01, 5, 0.01);
  GeneratorContext ctx(spec, SineRate{0.05, 1.0});
  IntegratorConfig cfg;
  cfg.window_tol = 1e-8;
  cfg.t_max = 12000.0;
  const auto ss = find_steady_state(ctx, cfg);
  REQUIRE(ss.converged);

  const double period = ss.window_length;
  const double t0 = ss.elapsed_time + period / 3.0;
  const int m = 600;
  std::vector<double> samples(static_cast<size_t>(m + 1));
  for (int i = 0; i <= m; ++i)
    samples[static_cast<size_t>(i)] = t0 + period * i / m;
  auto traj_cfg = cfg;
  const auto traj = evolve(ctx, all_ground_state(spec), 0.0, samples.back(),
                           traj_cfg, samples);
  // trapezoid average over the shifted window (equispaced, full period)
  double avg = 0.0;
  for (int i = 0; i <= m; ++i) {
    const double w = (i == 0 || i == m) ? 0.5 : 1.0;
    avg += w * traj.populations[static_cast<size_t>(i)](4);
  }
  avg /= m;
  CHECK(avg / 7.0 == doctest::Approx(ss.p_ext / 7.0).epsilon(1e-7));
}

}  // TEST_SUITE
