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

#include "dephasim/chain.hpp"

using namespace dephasim;

namespace {
constexpr double kPi = std::numbers::pi;

ChainSpec bench(int extraction_site) {
  return ChainSpec::uniform(7, 1.0, 0.1, 1, 0.01, extraction_site, 0.01);
}
}  // namespace

TEST_SUITE("chain") {

TEST_CASE("spec validation") {
  CHECK_NOTHROW(bench(5).validate());
  CHECK_THROWS_AS(ChainSpec::uniform(0, 1, 0.1, 1, 0, 2, 0).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(ChainSpec::uniform(13, 1, 0.1, 1, 0.01, 5, 0.01).validate(),
                  std::invalid_argument);
  auto bad_sites = bench(5);
  bad_sites.extraction_site = 1;  // collides with injection at rate > 0
  CHECK_THROWS_AS(bad_sites.validate(), std::invalid_argument);
  auto bad_rate = bench(5);
  bad_rate.injection_rate = -1.0;
  CHECK_THROWS_AS(bad_rate.validate(), std::invalid_argument);
  auto bad_couplings = bench(5);
  bad_couplings.couplings.pop_back();
  CHECK_THROWS_AS(bad_couplings.validate(), std::invalid_argument);

  // Single site with an inert extraction channel is a valid chain.
  auto single = ChainSpec::uniform(1, 1.0, 0.0, 1, 0.01, 1, 0.0);
  CHECK_NOTHROW(single.validate());
}

TEST_CASE("single-site sigma_z in the {excited, ground} ordering") {
  auto spec = ChainSpec::uniform(1, 1.0, 0.0, 1, 0.0, 1, 0.0);
  const auto ops = build_operators(spec);
  CMatrix sz = CMatrix(ops.sz[0]);
  CHECK(sz(0, 0) == Complex(1.0, 0.0));
  CHECK(sz(1, 1) == Complex(-1.0, 0.0));
  CHECK(sz(0, 1) == Complex(0.0, 0.0));
}

TEST_CASE("Kronecker embedding: site 2 of 2 is I (x) diag(1,-1)") {
  auto spec = ChainSpec::uniform(2, 1.0, 0.1, 1, 0.0, 2, 0.0);
  const auto ops = build_operators(spec);
  CMatrix sz2 = CMatrix(ops.sz[1]);
  CMatrix expected(4, 4);
  expected.setZero();
  expected(0, 0) = 1; expected(1, 1) = -1; expected(2, 2) = 1; expected(3, 3) = -1;
  CHECK((sz2 - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("operator algebra for several sizes") {
  for (int n : {1, 2, 4, 7}) {
    auto spec = ChainSpec::uniform(n, 1.0, 0.1, 1, 0.0, n > 1 ? n : 1, 0.0);
    const auto ops = build_operators(spec);
    for (int i = 0; i < n; ++i) {
      // (sigma^+)^2 = 0, sigma^- = (sigma^+)^dag, (sigma^z)^2 = 1
      const SparseOp sp2 = ops.sigma_plus[i] * ops.sigma_plus[i];
      CHECK(CMatrix(sp2).cwiseAbs().maxCoeff() == 0.0);
      const CMatrix sm = CMatrix(ops.sigma_minus[i]);
      CHECK((sm - CMatrix(ops.sigma_plus[i]).adjoint()).cwiseAbs().maxCoeff() == 0.0);
      const SparseOp zz = ops.sz[i] * ops.sz[i];
      CMatrix id = CMatrix::Identity(spec.dim(), spec.dim());
      CHECK((CMatrix(zz) - id).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("sigma_z operators commute pairwise") {
  auto spec = bench(5);
  const auto ops = build_operators(spec);
  for (int i = 0; i < 7; i += 3)
    for (int j = i + 1; j < 7; j += 2) {
      const SparseOp ab = ops.sz[i] * ops.sz[j];
      const SparseOp ba = ops.sz[j] * ops.sz[i];
      CHECK(CMatrix(SparseOp(ab - ba)).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("single-site Hamiltonian") {
  auto spec = ChainSpec::uniform(1, 1.0, 0.0, 1, 0.0, 1, 0.0);
  const auto ops = build_operators(spec);
  const CMatrix h = CMatrix(build_hamiltonian(spec, ops));
  CHECK(h(0, 0).real() == doctest::Approx(0.5));
  CHECK(h(1, 1).real() == doctest::Approx(-0.5));
}

TEST_CASE("two-site single-excitation block has eigenvalues +/- lambda") {
  auto spec = ChainSpec::uniform(2, 1.0, 0.1, 1, 0.0, 2, 0.0);
  const auto ops = build_operators(spec);
  const CMatrix h = CMatrix(build_hamiltonian(spec, ops));
  // Indices 1 (site 1 excited) and 2 (site 2 excited) span the block; the
  // diagonal energy is zero for uniform omega.
  Eigen::Matrix2cd block;
  block << h(1, 1), h(1, 2), h(2, 1), h(2, 2);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(block);
  CHECK(es.eigenvalues()(0) == doctest::Approx(-0.1).epsilon(1e-12));
  CHECK(es.eigenvalues()(1) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("Hamiltonian is Hermitian and conserves excitation number") {
  auto spec = bench(5);
  const auto ops = build_operators(spec);
  const SparseOp h = build_hamiltonian(spec, ops);
  const CMatrix hd = CMatrix(h);
  CHECK((hd - hd.adjoint()).cwiseAbs().maxCoeff() <= 1e-12);
  const SparseOp nop = build_number_operator(spec, ops);
  const SparseOp hn = h * nop;
  const SparseOp nh = nop * h;
  CHECK(CMatrix(SparseOp(hn - nh)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("rate model validation") {
  CHECK_NOTHROW(validate(RateModel(NmrRate{0.0, 1.0, 0.52})));
  CHECK_THROWS_AS(validate(RateModel(NmrRate{0.0, 1.0, kPi / 4.0})),
                  std::invalid_argument);
  CHECK_THROWS_AS(validate(RateModel(NmrRate{0.0, 1.0, -0.1})), std::invalid_argument);
  CHECK_THROWS_AS(validate(RateModel(NmrRate{0.0, 1.0, 1.6})), std::invalid_argument);
  CHECK_THROWS_AS(validate(RateModel(SineSumRate{1.0, {}})), std::invalid_argument);
  CHECK_THROWS_AS(validate(RateModel(SineRate{1.0, 0.0})), std::invalid_argument);
}

TEST_CASE("rate values") {
  CHECK(rate_at(ConstantRate{0.3}, 17.0) == doctest::Approx(0.3));
  // sin(3 pi / 2) = -1
  CHECK(rate_at(SineRate{1.0, 1.0}, 1.5 * kPi) == doctest::Approx(-1.0));
  CHECK(rate_at(OffsetSineRate{0.5, 1.0, 1.0}, 1.5 * kPi) == doctest::Approx(-0.5));
  // the oscillatory NMR part vanishes at t = 0 and for theta = 0
  CHECK(rate_at(NmrRate{0.5, 1.0, 0.9}, 0.0) == doctest::Approx(0.5));
  for (double t : {0.1, 0.37, 1.4})
    CHECK(rate_at(NmrRate{0.7, 1.0, 0.0}, t) == doctest::Approx(0.7));
  // sine sum is the normalized average of its components
  const SineSumRate sum{1.5, {0.3, 2.0, 4.0}};
  const double t = 0.77;
  const double expect =
      1.5 / 3.0 * (std::sin(0.3 * t) + std::sin(2.0 * t) + std::sin(4.0 * t));
  CHECK(rate_at(sum, t) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("NMR shift values") {
  // theta = pi/4: cos(2 theta) = 0 kills the shift everywhere.
  for (double t : {0.0, 0.2, 0.7})
    CHECK(shift_at(NmrRate{0.0, 1.0, kPi / 4.0}, t) == doctest::Approx(0.0));
  // theta = 0: the denominator collapses to 4, s(t) = pi J / 2.
  for (double t : {0.0, 0.11, 0.5, 0.93})
    CHECK(shift_at(NmrRate{0.0, 2.0, 0.0}, t) == doctest::Approx(kPi).epsilon(1e-12));
  CHECK(shift_at(NmrRate{0.0, 1.0, 0.52}, 0.0) ==
        doctest::Approx(2.0 * kPi * std::cos(1.04) / 4.0).epsilon(1e-12));
}

TEST_CASE("NMR oscillation minimum (Markovian crossover)") {
  // Analytic minimum of the oscillatory part: with beta = sin(2 theta) and
  // x* = 1/(2 - beta^2),
  //   min_t gamma_osc = -(pi J beta^2 / 2) sqrt(x*(1-x*)) / (1 - beta^2 x*).
  auto analytic_min = [](double theta, double j) {
    const double b2 = std::pow(std::sin(2.0 * theta), 2);
    const double x = 1.0 / (2.0 - b2);
    return -kPi * j * b2 / 2.0 * std::sqrt(x * (1.0 - x)) / (1.0 - b2 * x);
  };
  double lo = 1e9;
  for (int i = 0; i <= 100000; ++i)
    lo = std::min(lo, rate_at(NmrRate{0.0, 1.0, 0.52}, i / 100000.0));
  CHECK(analytic_min(0.52, 1.0) == doctest::Approx(lo).epsilon(1e-6));
  CHECK(analytic_min(0.52, 1.0) == doctest::Approx(-1.1539097).epsilon(1e-6));
  // theta = pi/6 gives beta^2 = 3/4, x* = 4/5 and exactly -3 pi / 8.
  CHECK(analytic_min(kPi / 6.0, 1.0) ==
        doctest::Approx(-3.0 * kPi / 8.0).epsilon(1e-12));
}

TEST_CASE("fundamental and fastest periods") {
  CHECK(fundamental_period(SineRate{1.0, 2.0}) == doctest::Approx(kPi));
  CHECK(fundamental_period(OffsetSineRate{1.0, 1.0, 1.0}) ==
        doctest::Approx(2.0 * kPi));
  CHECK(fundamental_period(NmrRate{0.0, 4.0, 0.3}) == doctest::Approx(0.25));
  CHECK(fundamental_period(ConstantRate{1.0}, 12.5) == doctest::Approx(12.5));
  // nu = {0.3, 2, 4} -> periods {20pi/3, pi, pi/2} -> common period 20 pi
  CHECK(fundamental_period(SineSumRate{1.0, {0.3, 2.0, 4.0}}) ==
        doctest::Approx(20.0 * kPi).epsilon(1e-12));
  CHECK(fundamental_period(SineSumRate{1.0, {0.3, 1.0, 4.0}}) ==
        doctest::Approx(20.0 * kPi).epsilon(1e-12));
  CHECK(fastest_period(SineSumRate{1.0, {0.3, 2.0, 4.0}}) ==
        doctest::Approx(kPi / 2.0).epsilon(1e-12));
}

TEST_CASE("sweep parameter substitution") {
  RateModel m = SineRate{0.0, 2.0};
  m = with_parameter(m, "gamma", 1.5);
  CHECK(rate_at(m, kPi / 4.0) == doctest::Approx(1.5));  // sin(pi/2) = 1
  CHECK_THROWS_AS(with_parameter(m, "theta", 0.1), std::invalid_argument);
  RateModel n = NmrRate{0.0, 1.0, 0.1};
  n = with_parameter(n, "theta", 0.52);
  CHECK(std::get<NmrRate>(n).theta == doctest::Approx(0.52));
  CHECK_THROWS_AS(with_parameter(n, "nu", 0.5), std::invalid_argument);
}

}  // TEST_SUITE
