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

#include "dephasim/liouvillian.hpp"

#include <bit>
#include <cmath>
#include <sstream>

#include <unsupported/Eigen/KroneckerProduct>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dephasim {

ChainTables::ChainTables(const ChainSpec& chain_spec) : spec(chain_spec) {
  spec.validate();
  ops = build_operators(spec);
  hamiltonian = build_hamiltonian(spec, ops);
  number_op = build_number_operator(spec, ops);
  dim = spec.dim();

  h_diag = RVector::Zero(dim);
  h_hop = SparseOp(dim, dim);
  std::vector<Eigen::Triplet<Complex>> off;
  for (int row = 0; row < hamiltonian.outerSize(); ++row) {
    for (SparseOp::InnerIterator it(hamiltonian, row); it; ++it) {
      if (it.row() == it.col())
        h_diag(it.row()) = it.value().real();
      else
        off.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    }
  }
  h_hop.setFromTriplets(off.begin(), off.end());
  h_hop.makeCompressed();

  popcnt.resize(static_cast<size_t>(dim));
  for (int a = 0; a < dim; ++a)
    popcnt[static_cast<size_t>(a)] =
        static_cast<uint8_t>(std::popcount(static_cast<unsigned>(a)));

  inj_mask = 1 << spec.site_bit(spec.injection_site);
  ext_mask = 1 << spec.site_bit(spec.extraction_site);
  inj_ground.resize(static_cast<size_t>(dim));
  ext_excited.resize(static_cast<size_t>(dim));
  for (int a = 0; a < dim; ++a) {
    inj_ground[static_cast<size_t>(a)] = (a & inj_mask) ? 1 : 0;
    ext_excited[static_cast<size_t>(a)] = (a & ext_mask) ? 0 : 1;
  }

  excited_indices.resize(static_cast<size_t>(spec.n_sites));
  for (int i = 1; i <= spec.n_sites; ++i) {
    const int mask = 1 << spec.site_bit(i);
    auto& list = excited_indices[static_cast<size_t>(i - 1)];
    for (int a = 0; a < dim; ++a)
      if (!(a & mask)) list.push_back(a);
  }
}

GeneratorContext::GeneratorContext(const ChainSpec& spec, RateModel model)
    : GeneratorContext(std::make_shared<const ChainTables>(spec), std::move(model)) {}

GeneratorContext::GeneratorContext(std::shared_ptr<const ChainTables> tables,
                                   RateModel model)
    : tables_(std::move(tables)), model_(std::move(model)) {
  dephasim::validate(model_);
  include_shift_ = has_shift_term(model_);
}

GeneratorContext GeneratorContext::with_model(RateModel model) const {
  return GeneratorContext(tables_, std::move(model));
}

double GeneratorContext::population(const CMatrix& rho, int site) const {
  double p = 0.0;
  for (int a : tables_->excited_indices[static_cast<size_t>(site - 1)])
    p += rho(a, a).real();
  return p;
}

RVector GeneratorContext::populations(const CMatrix& rho) const {
  RVector n(spec().n_sites);
  for (int i = 1; i <= spec().n_sites; ++i) n(i - 1) = population(rho, i);
  return n;
}

void apply_rhs(const GeneratorContext& ctx, const CMatrix& rho, double t,
               CMatrix& out, RhsWorkspace& ws) {
  const ChainTables& tb = ctx.tables();
  const int d = tb.dim;
  if (rho.rows() != d || rho.cols() != d)
    throw std::invalid_argument("apply_rhs: state dimension mismatch");
  out.resize(d, d);
  ws.hop.resize(d, d);
  ws.hop_adj.resize(d, d);
  ws.wr_b.resize(d);
  ws.wi_b.resize(d);

  // Rate models can throw (NMR singularity); evaluate before going parallel.
  const double g = rate_at(ctx.model(), t);
  double s = 0.0;
  if (ctx.include_shift())
    if (const auto* nmr = std::get_if<NmrRate>(&ctx.model())) s = shift_at(*nmr, t);

  const double ki = tb.spec.injection_rate;
  const double ke = tb.spec.extraction_rate;
  const int im = tb.inj_mask;
  const int em = tb.ext_mask;
  const int* hop_outer = tb.h_hop.outerIndexPtr();
  const int* hop_inner = tb.h_hop.innerIndexPtr();
  const Complex* hop_val = tb.h_hop.valuePtr();
  const double* hd = tb.h_diag.data();
  const uint8_t* pc = tb.popcnt.data();
  const uint8_t* gin = tb.inj_ground.data();
  const uint8_t* eex = tb.ext_excited.data();

  // Elementwise weight on rho(a, b), split into per-row scalars plus
  // per-column streams so the hot loop runs on contiguous 1D data:
  //   real: -gamma * popcount(a^b) - d(a) - d(b)   (dephasing + projectors)
  //   imag: -(h_a - h_b) + 2 s (pc_a - pc_b)       (H diagonal + shift)
  for (int b = 0; b < d; ++b) {
    ws.wr_b(b) = -0.5 * (ki * gin[b] + ke * eex[b]);
    ws.wi_b(b) = hd[b] - 2.0 * s * pc[b];
  }
  const double* wr_b = ws.wr_b.data();
  const double* wi_b = ws.wi_b.data();

#pragma omp parallel
  {
    // Pass 1: ws.hop = H_hop * rho (CSR rows against contiguous rho rows).
#pragma omp for schedule(static)
    for (int a = 0; a < d; ++a) {
      double* m = reinterpret_cast<double*>(ws.hop.data() + static_cast<ptrdiff_t>(a) * d);
      for (int b = 0; b < 2 * d; ++b) m[b] = 0.0;
      for (int k = hop_outer[a]; k < hop_outer[a + 1]; ++k) {
        const double hr = hop_val[k].real();
        const double hi = hop_val[k].imag();
        const double* r =
            reinterpret_cast<const double*>(rho.data() + static_cast<ptrdiff_t>(hop_inner[k]) * d);
        for (int b = 0; b < d; ++b) {
          m[2 * b] += hr * r[2 * b] - hi * r[2 * b + 1];
          m[2 * b + 1] += hr * r[2 * b + 1] + hi * r[2 * b];
        }
      }
    }

    // Pass 1b: materialize M^dagger so pass 2 reads only contiguous rows.
#pragma omp for schedule(static)
    for (int a = 0; a < d; ++a) {
      Complex* row = ws.hop_adj.data() + static_cast<ptrdiff_t>(a) * d;
      for (int b = 0; b < d; ++b) row[b] = std::conj(ws.hop(b, a));
    }

    // Pass 2 (fused): commutator -i (M - M^dagger) plus every term that is
    // elementwise in this basis. sigma^z_i are diagonal, so
    //   sum_i gamma/2 (z_i(a) z_i(b) - 1)  = -gamma * popcount(a^b)
    //   -i s sum_i (z_i(a) - z_i(b))       = +2 i s (pc(a) - pc(b))
    // and the injection/extraction anticommutator halves are diagonal
    // projectors. The sandwich terms gather from bit-shifted entries in
    // mask-aligned blocks appended after the main stream loop.
#pragma omp for schedule(static)
    for (int a = 0; a < d; ++a) {
      const double* mrow =
          reinterpret_cast<const double*>(ws.hop.data() + static_cast<ptrdiff_t>(a) * d);
      const double* madj =
          reinterpret_cast<const double*>(ws.hop_adj.data() + static_cast<ptrdiff_t>(a) * d);
      const double* rrow =
          reinterpret_cast<const double*>(rho.data() + static_cast<ptrdiff_t>(a) * d);
      double* orow =
          reinterpret_cast<double*>(out.data() + static_cast<ptrdiff_t>(a) * d);

      double pc_diff[4096];  // covers the 12-site dimension cap
      for (int b = 0; b < d; ++b)
        pc_diff[b] = static_cast<double>(pc[a ^ b]);

      const double wr_a = -0.5 * (ki * gin[a] + ke * eex[a]);
      const double wi_a = -hd[a] + 2.0 * s * pc[a];
      for (int b = 0; b < d; ++b) {
        const double wr = -g * pc_diff[b] + wr_a + wr_b[b];
        const double wi = wi_a + wi_b[b];
        const double mr = mrow[2 * b] - madj[2 * b];
        const double mi = mrow[2 * b + 1] - madj[2 * b + 1];
        const double rr = rrow[2 * b];
        const double ri = rrow[2 * b + 1];
        orow[2 * b] = mi + wr * rr - wi * ri;        // -i(M - Mdag): re = +im
        orow[2 * b + 1] = -mr + wr * ri + wi * rr;   //               im = -re
      }

      if (ki > 0.0 && (a & im) == 0) {
        const double* src = reinterpret_cast<const double*>(
            rho.data() + static_cast<ptrdiff_t>(a | im) * d);
        for (int b0 = 0; b0 < d; b0 += 2 * im)
          for (int b = b0; b < b0 + im; ++b) {
            orow[2 * b] += ki * src[2 * (b + im)];
            orow[2 * b + 1] += ki * src[2 * (b + im) + 1];
          }
      }
      if (ke > 0.0 && (a & em) != 0) {
        const double* src = reinterpret_cast<const double*>(
            rho.data() + static_cast<ptrdiff_t>(a & ~em) * d);
        for (int b0 = em; b0 < d; b0 += 2 * em)
          for (int b = b0; b < b0 + em; ++b) {
            orow[2 * b] += ke * src[2 * (b - em)];
            orow[2 * b + 1] += ke * src[2 * (b - em) + 1];
          }
      }
    }
  }
}

CMatrix apply_rhs(const GeneratorContext& ctx, const CMatrix& rho, double t) {
  CMatrix out;
  RhsWorkspace ws;
  apply_rhs(ctx, rho, t, out, ws);
  return out;
}

CMatrix apply_rhs_reference(const GeneratorContext& ctx, const CMatrix& rho,
                            double t) {
  const ChainSpec& spec = ctx.spec();
  const SiteOperatorSet& ops = ctx.ops();
  const Complex I(0.0, 1.0);

  CMatrix out = -I * (ctx.hamiltonian() * rho - rho * ctx.hamiltonian());

  const double g = rate_at(ctx.model(), t);
  for (int i = 0; i < spec.n_sites; ++i) {
    const SparseOp& z = ops.sz[static_cast<size_t>(i)];
    out += 0.5 * g * (CMatrix(z * rho * z) - rho);
  }
  if (ctx.include_shift()) {
    if (const auto* nmr = std::get_if<NmrRate>(&ctx.model())) {
      const double s = shift_at(*nmr, t);
      for (int i = 0; i < spec.n_sites; ++i) {
        const SparseOp& z = ops.sz[static_cast<size_t>(i)];
        out += -I * s * (CMatrix(z * rho) - CMatrix(rho * z));
      }
    }
  }

  auto dissipator = [&rho](const SparseOp& l, double rate) -> CMatrix {
    const SparseOp ldl = (SparseOp(l.adjoint()) * l).eval();
    return rate * (CMatrix(l * rho * SparseOp(l.adjoint())) -
                   0.5 * (CMatrix(ldl * rho) + CMatrix(rho * ldl)));
  };
  if (spec.injection_rate > 0.0)
    out += dissipator(ops.sigma_plus[static_cast<size_t>(spec.injection_site - 1)],
                      spec.injection_rate);
  if (spec.extraction_rate > 0.0)
    out += dissipator(ops.sigma_minus[static_cast<size_t>(spec.extraction_site - 1)],
                      spec.extraction_rate);
  return out;
}

Eigen::SparseMatrix<Complex> build_constant_superoperator(
    const GeneratorContext& ctx, double gamma_const, int max_sites) {
  const ChainSpec& spec = ctx.spec();
  if (spec.n_sites > max_sites) {
    std::ostringstream os;
    os << "build_constant_superoperator: n_sites = " << spec.n_sites
       << " exceeds the superoperator cap of " << max_sites
       << " (dimension grows as 4^N)";
    throw std::invalid_argument(os.str());
  }
  const int d = spec.dim();
  using Sp = Eigen::SparseMatrix<Complex>;
  Sp id(d, d);
  id.setIdentity();
  const Complex I(0.0, 1.0);

  const Sp h = Sp(ctx.hamiltonian());
  Sp l = (-I * (Eigen::kroneckerProduct(id, h) -
                Eigen::kroneckerProduct(Sp(h.transpose()), id)))
             .eval();

  const SiteOperatorSet& ops = ctx.ops();
  const Sp id2 = Eigen::kroneckerProduct(id, id).eval();
  for (int i = 0; i < spec.n_sites; ++i) {
    const Sp z = Sp(ops.sz[static_cast<size_t>(i)]);
    l += (0.5 * gamma_const) *
         (Eigen::kroneckerProduct(Sp(z.transpose()), z).eval() - id2);
  }
  auto add_dissipator = [&](const SparseOp& lop_rm, double rate) {
    const Sp lop = Sp(lop_rm);
    const Sp ldag = Sp(lop.adjoint());
    const Sp ldl = (ldag * lop).eval();
    l += rate * (Eigen::kroneckerProduct(Sp(lop.conjugate()), lop).eval() -
                 0.5 * Eigen::kroneckerProduct(id, ldl).eval() -
                 0.5 * Eigen::kroneckerProduct(Sp(ldl.transpose()), id).eval());
  };
  if (spec.injection_rate > 0.0)
    add_dissipator(ctx.ops().sigma_plus[static_cast<size_t>(spec.injection_site - 1)],
                   spec.injection_rate);
  if (spec.extraction_rate > 0.0)
    add_dissipator(ctx.ops().sigma_minus[static_cast<size_t>(spec.extraction_site - 1)],
                   spec.extraction_rate);
  l.makeCompressed();
  return l;
}

CVector vec(const CMatrix& m) {
  const int rows = static_cast<int>(m.rows());
  const int cols = static_cast<int>(m.cols());
  CVector v(static_cast<ptrdiff_t>(rows) * cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) v(static_cast<ptrdiff_t>(c) * rows + r) = m(r, c);
  return v;
}

CMatrix unvec(const CVector& v, int dim) {
  CMatrix m(dim, dim);
  for (int c = 0; c < dim; ++c)
    for (int r = 0; r < dim; ++r) m(r, c) = v(static_cast<ptrdiff_t>(c) * dim + r);
  return m;
}

}  // namespace dephasim
