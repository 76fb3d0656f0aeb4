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

#ifndef DEPHASIM_TYPES_HPP
#define DEPHASIM_TYPES_HPP

#include <complex>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace dephasim {

using Complex = std::complex<double>;

// Dense matrices are row-major so the RHS kernels can stream contiguous rows.
using CMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

// Site operators are Kronecker products of 2x2 blocks and extremely sparse.
using SparseOp = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

// The chain state: Hermitian, unit-trace, dimension 2^N.
using DensityMatrix = CMatrix;

}  // namespace dephasim

#endif  // DEPHASIM_TYPES_HPP
