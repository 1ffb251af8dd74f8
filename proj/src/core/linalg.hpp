// Copyright 2026 The gsdlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <vector>

#include "core/matrix.hpp"

namespace gsdlab {

// Column-orthonormal basis of a k-dimensional subspace of R^p.
struct Subspace {
  std::size_t ambient_dim = 0;  // p
  std::size_t k = 0;
  Matrix basis;  // p x k, basisᵀ·basis = I_k within 1e-10
};

struct SvdResult {
  Matrix left;                          // m x r, column-orthonormal
  std::vector<double> singular_values;  // non-increasing, r = min(m, p)
  Subspace right;                       // r columns in ambient dimension p
};

// Principal angles in [0, pi/2], non-decreasing.
struct PrincipalAngles {
  std::vector<double> angles;
};

// Thin QR-based orthonormalization of the column space of m.
// Throws RankDeficient when the smallest |R_jj| falls under 1e-12 times the
// largest.
Subspace orthonormalize(const Matrix& m);

// Full thin SVD by one-sided Jacobi applied on whichever side keeps the
// working Gram dimension at min(rows, cols). Deterministic: ties keep their
// pre-sort order and each right singular vector is signed so its
// largest-magnitude entry is non-negative.
SvdResult svd(const Matrix& m);

// First k components of svd(m). Throws BadK when k is out of 1..min(m, p),
// NonFinite on NaN/Inf input.
SvdResult top_k_svd(const Matrix& m, std::size_t k);

std::vector<double> singular_values(const Matrix& m);

// Angles theta_i = arccos(sigma_i(V1ᵀV2)); cosines are clamped to [0, 1]
// before arccos.
PrincipalAngles principal_angles(const Subspace& a, const Subspace& b);

// sqrt(k - sum cos^2 theta_i) = sqrt(sum sin^2 theta_i), in [0, sqrt(k)].
double projection_metric(const Subspace& a, const Subspace& b);
double projection_metric(const PrincipalAngles& angles);

// Largest singular value via power iteration on the smaller Gram side, with
// a tolerance-based stop. Throws NonFinite on NaN/Inf input.
double spectral_norm(const Matrix& m);

struct SymmetricEigen {
  std::vector<double> values;  // non-increasing
  Matrix vectors;              // columns, same order as values
};

// Cyclic Jacobi eigendecomposition of a symmetric matrix.
SymmetricEigen symmetric_eigen(const Matrix& a);

// basis·basisᵀ, the p x p orthogonal projector onto the subspace.
Matrix projector(const Subspace& s);

// Appends orthonormal directions (Gram-Schmidt over coordinate vectors)
// until the basis has k columns. Requires k <= ambient_dim.
Subspace extend_basis(const Subspace& s, std::size_t k);

bool is_orthonormal(const Matrix& basis, double tol);

}  // namespace gsdlab
