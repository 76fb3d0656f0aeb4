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

// Compares the elementwise OpenMP kernel against the serial sparse-operator
// reference, per right-hand-side evaluation and on a short steady-state
// solve.

#include <chrono>
#include <cstdio>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "dephasim/evolution.hpp"

using namespace dephasim;
using Clock = std::chrono::steady_clock;

namespace {

CMatrix random_hermitian(int d, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  CMatrix m(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) m(a, b) = Complex(dist(rng), dist(rng));
  return 0.5 * (m + m.adjoint()).eval();
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  const int reps = argc > 1 ? std::atoi(argv[1]) : 400;
#ifdef _OPENMP
  std::printf("OpenMP max threads: %d\n", omp_get_max_threads());
#endif
  std::printf("%-4s %-6s %14s %14s %10s %12s\n", "N", "dim", "kernel[us]",
              "reference[us]", "speedup", "max|diff|");

  for (int n : {4, 5, 6, 7}) {
    auto spec = ChainSpec::uniform(n, 1.0, 0.1, 1, 0.01, n - 2 > 1 ? n - 2 : 2, 0.01);
    GeneratorContext ctx(spec, SineRate{0.5, 1.0});
    const int d = ctx.dim();
    const CMatrix rho = random_hermitian(d, 42u + static_cast<unsigned>(n));

    CMatrix out;
    RhsWorkspace ws;
    apply_rhs(ctx, rho, 0.3, out, ws);  // warm up / allocate
    const CMatrix ref = apply_rhs_reference(ctx, rho, 0.3);
    const double diff = (out - ref).cwiseAbs().maxCoeff();

    auto t0 = Clock::now();
    for (int r = 0; r < reps; ++r) apply_rhs(ctx, rho, 0.3, out, ws);
    const double t_fast = seconds_since(t0) / reps * 1e6;

    const int ref_reps = std::max(4, reps / 20);
    t0 = Clock::now();
    for (int r = 0; r < ref_reps; ++r) (void)apply_rhs_reference(ctx, rho, 0.3);
    const double t_ref = seconds_since(t0) / ref_reps * 1e6;

    std::printf("%-4d %-6d %14.2f %14.2f %9.1fx %12.2e\n", n, d, t_fast, t_ref,
                t_ref / t_fast, diff);
  }

  // One short steady-state solve at the benchmark chain size.
  auto spec = ChainSpec::uniform(7, 1.0, 0.1, 1, 0.01, 5, 0.01);
  GeneratorContext ctx(spec, ConstantRate{0.1});
  IntegratorConfig cfg;
  cfg.window_tol = 1e-6;
  cfg.t_max = 2000.0;
  auto t0 = Clock::now();
  const auto ss = find_steady_state(ctx, cfg);
  const double wall = seconds_since(t0);
  std::printf("\nsteady state N=7 (constant gamma=0.1): %.2f s, %ld steps, "
              "converged=%d, J~=%.6f\n",
              wall, ss.stats.accepted, ss.converged, ss.p_ext / 7.0);
  return 0;
}
