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

#ifndef DEPHASIM_LIOUVILLIAN_HPP
#define DEPHASIM_LIOUVILLIAN_HPP

#include <cstdint>
#include <memory>
#include <vector>

#include "dephasim/chain.hpp"
#include "dephasim/types.hpp"

namespace dephasim {

/// Immutable per-chain tables shared by every generator built on the same
/// chain: operators, Hamiltonian split into diagonal and hopping parts, and
/// the bit masks used by the elementwise kernel.
struct ChainTables {
  ChainSpec spec;
  SiteOperatorSet ops;
  SparseOp hamiltonian;
  SparseOp number_op;

  int dim = 0;
  RVector h_diag;              // diagonal of H
  SparseOp h_hop;              // strictly off-diagonal part of H (CSR)
  std::vector<uint8_t> popcnt; // popcount of each basis index

  // Injection at site `injection_site`: mask of that site's bit plus the
  // ground/excited projector diagonals entering the anticommutator halves.
  int inj_mask = 0;
  int ext_mask = 0;
  std::vector<uint8_t> inj_ground;   // 1 if injection-site bit set (ground)
  std::vector<uint8_t> ext_excited;  // 1 if extraction-site bit clear (excited)

  // Per-site excited-index lists for population functionals.
  std::vector<std::vector<int>> excited_indices;

  explicit ChainTables(const ChainSpec& spec);
};

/// Everything needed to evaluate the master-equation right-hand side:
/// the chain tables (shared, immutable) plus the rate model. Cheap to copy;
/// copies made with a different rate model share the tables, which is how
/// parameter sweeps fan out work across threads.
class GeneratorContext {
 public:
  GeneratorContext(const ChainSpec& spec, RateModel model);
  GeneratorContext(std::shared_ptr<const ChainTables> tables, RateModel model);

  /// Same chain, different rate model (shares the operator tables).
  GeneratorContext with_model(RateModel model) const;

  const ChainSpec& spec() const { return tables_->spec; }
  const SiteOperatorSet& ops() const { return tables_->ops; }
  const SparseOp& hamiltonian() const { return tables_->hamiltonian; }
  const SparseOp& number_op() const { return tables_->number_op; }
  const ChainTables& tables() const { return *tables_; }
  const RateModel& model() const { return model_; }
  int dim() const { return tables_->dim; }

  /// Include the -i s(t) [sigma^z_i, rho] term (NMR models only; on by
  /// default whenever the model carries a shift).
  bool include_shift() const { return include_shift_; }
  void set_include_shift(bool on) { include_shift_ = on; }

  /// Population of site i (1-based) in a state: <sigma^+_i sigma^-_i>.
  double population(const CMatrix& rho, int site) const;
  RVector populations(const CMatrix& rho) const;

 private:
  std::shared_ptr<const ChainTables> tables_;
  RateModel model_;
  bool include_shift_ = false;
};

/// Scratch buffers for the production kernel.
struct RhsWorkspace {
  CMatrix hop;       // H_hop * rho
  CMatrix hop_adj;   // (H_hop * rho)^dagger
  RVector wr_b;      // per-column real weight stream
  RVector wi_b;      // per-column imaginary weight stream
};

/// Master-equation right-hand side,
///   d rho/dt = -i [H, rho]
///            + sum_i gamma(t)/2 (sigma^z_i rho sigma^z_i - rho)
///            - i sum_i s(t) [sigma^z_i, rho]                  (NMR only)
///            + kappa_inj/2 (2 s+_1 rho s-_1 - {s-_1 s+_1, rho})
///            + kappa_ext/2 (2 s-_k rho s+_k - {s+_k s-_k, rho}),
/// evaluated with an elementwise kernel (OpenMP-parallel over rows).
/// Precondition: rho Hermitian (the commutator uses H rho - (H rho)^dagger).
void apply_rhs(const GeneratorContext& ctx, const CMatrix& rho, double t,
               CMatrix& out, RhsWorkspace& ws);

/// Allocating convenience overload.
CMatrix apply_rhs(const GeneratorContext& ctx, const CMatrix& rho, double t);

/// Serial reference implementation built from explicit sparse-operator
/// products. Kept deliberately direct; the production kernel is tested
/// against it and the benchmark compares the two.
CMatrix apply_rhs_reference(const GeneratorContext& ctx, const CMatrix& rho,
                            double t);

/// d^2 x d^2 matrix L with vec(d rho/dt) = L vec(rho) for the generator with
/// the dephasing rate frozen at gamma_const (no shift term). vec() stacks
/// columns. Rejects chains above `max_sites` (the superoperator dimension
/// grows as 4^N).
Eigen::SparseMatrix<Complex> build_constant_superoperator(
    const GeneratorContext& ctx, double gamma_const, int max_sites = 7);

/// Column-stacking vectorization matching build_constant_superoperator.
CVector vec(const CMatrix& m);
CMatrix unvec(const CVector& v, int dim);

}  // namespace dephasim

#endif  // DEPHASIM_LIOUVILLIAN_HPP
