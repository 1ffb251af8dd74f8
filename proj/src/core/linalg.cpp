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

#include "core/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "core/rng.hpp"

namespace gsdlab {

namespace {

constexpr double kQrRankTol = 1e-12;
constexpr double kJacobiTol = 1e-15;
constexpr int kJacobiMaxSweeps = 60;

// One-sided Jacobi: rotates column pairs of w until all pairs are mutually
// orthogonal. On return w holds U·diag(s) and v the accumulated rotations,
// so that w_in = w_out · vᵀ.
void one_sided_jacobi(Matrix& w, Matrix& v) {
  const std::size_t m = w.rows();
  const std::size_t n = w.cols();
  v = Matrix::identity(n);
  for (int sweep = 0; sweep < kJacobiMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        double aii = 0.0, ajj = 0.0, aij = 0.0;
        for (std::size_t r = 0; r < m; ++r) {
          const double wi = w(r, i), wj = w(r, j);
          aii += wi * wi;
          ajj += wj * wj;
          aij += wi * wj;
        }
        const double denom = std::sqrt(aii * ajj);
        if (denom == 0.0 || std::abs(aij) <= kJacobiTol * denom) continue;
        rotated = true;
        const double tau = (ajj - aii) / (2.0 * aij);
        const double t =
            (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t r = 0; r < m; ++r) {
          const double wi = w(r, i), wj = w(r, j);
          w(r, i) = c * wi - s * wj;
          w(r, j) = s * wi + c * wj;
        }
        for (std::size_t r = 0; r < n; ++r) {
          const double vi = v(r, i), vj = v(r, j);
          v(r, i) = c * vi - s * vj;
          v(r, j) = s * vi + c * vj;
        }
      }
    }
    if (!rotated) break;
  }
}

// Replaces near-zero columns of basis (those whose norm is ~0, i.e. null
// directions of the input) with unit vectors orthogonal to every other
// column, so the returned factor stays column-orthonormal.
void complete_zero_columns(Matrix& basis, const std::vector<double>& norms,
                           double tiny) {
  const std::size_t dim = basis.rows();
  const std::size_t n = basis.cols();
  for (std::size_t j = 0; j < n; ++j) {
    if (norms[j] > tiny) continue;
    // Gram-Schmidt a coordinate vector against all other columns.
    bool placed = false;
    for (std::size_t cand = 0; cand < dim && !placed; ++cand) {
      std::vector<double> e(dim, 0.0);
      e[cand] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t c = 0; c < n; ++c) {
          if (c == j) continue;
          double proj = 0.0;
          for (std::size_t r = 0; r < dim; ++r) proj += e[r] * basis(r, c);
          for (std::size_t r = 0; r < dim; ++r) e[r] -= proj * basis(r, c);
        }
      }
      double nrm = 0.0;
      for (double x : e) nrm += x * x;
      nrm = std::sqrt(nrm);
      if (nrm > 0.5) {
        for (std::size_t r = 0; r < dim; ++r) basis(r, j) = e[r] / nrm;
        placed = true;
      }
    }
    if (!placed)
      fail(Status::kInternal, "svd: could not complete orthonormal basis");
  }
}

}  // namespace

Subspace orthonormalize(const Matrix& m) {
  require(!m.empty(), Status::kEmptyMatrix, "orthonormalize: empty matrix");
  require(m.all_finite(), Status::kNonFinite,
          "orthonormalize: non-finite entries");
  const std::size_t rows = m.rows(), cols = m.cols();
  require(cols <= rows, Status::kRankDeficient,
          "orthonormalize: more columns than rows");

  // Householder QR; a holds the reflectors below the diagonal.
  Matrix a = m;
  std::vector<double> rdiag(cols, 0.0);
  std::vector<double> vhead(cols, 0.0);
  for (std::size_t j = 0; j < cols; ++j) {
    double nrm = 0.0;
    for (std::size_t r = j; r < rows; ++r) nrm += a(r, j) * a(r, j);
    nrm = std::sqrt(nrm);
    if (nrm == 0.0) {
      rdiag[j] = 0.0;
      vhead[j] = 0.0;
      continue;
    }
    const double alpha = a(j, j) >= 0.0 ? -nrm : nrm;
    // v = x - alpha*e1, stored in a(j.., j); vhead saves v_j.
    a(j, j) -= alpha;
    double vnorm2 = 0.0;
    for (std::size_t r = j; r < rows; ++r) vnorm2 += a(r, j) * a(r, j);
    rdiag[j] = alpha;
    vhead[j] = vnorm2;
    if (vnorm2 == 0.0) continue;
    for (std::size_t c = j + 1; c < cols; ++c) {
      double proj = 0.0;
      for (std::size_t r = j; r < rows; ++r) proj += a(r, j) * a(r, c);
      const double f = 2.0 * proj / vnorm2;
      for (std::size_t r = j; r < rows; ++r) a(r, c) -= f * a(r, j);
    }
  }

  double dmax = 0.0, dmin = 0.0;
  for (std::size_t j = 0; j < cols; ++j) {
    const double d = std::abs(rdiag[j]);
    dmax = std::max(dmax, d);
    dmin = j == 0 ? d : std::min(dmin, d);
  }
  require(dmax > 0.0 && dmin > kQrRankTol * dmax, Status::kRankDeficient,
          "orthonormalize: numerically rank-deficient input");

  // Q = H_0 H_1 ... H_{n-1} applied to the first n identity columns.
  Matrix q(rows, cols);
  for (std::size_t j = 0; j < cols; ++j) q(j, j) = 1.0;
  for (std::size_t j = cols; j-- > 0;) {
    if (vhead[j] == 0.0) continue;
    for (std::size_t c = 0; c < cols; ++c) {
      double proj = 0.0;
      for (std::size_t r = j; r < rows; ++r) proj += a(r, j) * q(r, c);
      const double f = 2.0 * proj / vhead[j];
      for (std::size_t r = j; r < rows; ++r) q(r, c) -= f * a(r, j);
    }
  }
  // Sign fix: make R_jj positive so e.g. an already-orthonormal input is
  // returned unchanged.
  for (std::size_t j = 0; j < cols; ++j) {
    if (rdiag[j] < 0.0)
      for (std::size_t r = 0; r < rows; ++r) q(r, j) = -q(r, j);
  }
  return Subspace{rows, cols, std::move(q)};
}

SvdResult svd(const Matrix& m) {
  require(!m.empty(), Status::kEmptyMatrix, "svd: empty matrix");
  require(m.all_finite(), Status::kNonFinite, "svd: non-finite entries");
  const bool transposed = m.cols() > m.rows();
  Matrix w = transposed ? transpose(m) : m;
  Matrix acc;
  one_sided_jacobi(w, acc);
  // Column norms of w are the singular values.
  const std::size_t r = w.cols();
  std::vector<double> norms(r, 0.0);
  for (std::size_t j = 0; j < r; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < w.rows(); ++i) s += w(i, j) * w(i, j);
    norms[j] = std::sqrt(s);
  }
  std::vector<std::size_t> order(r);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return norms[a] > norms[b]; });

  Matrix wn(w.rows(), r);   // normalized columns of w, sorted
  Matrix accs(acc.rows(), r);
  std::vector<double> svals(r, 0.0);
  const double smax = norms.empty() ? 0.0 : norms[order[0]];
  const double tiny = smax * 1e-300 + 1e-300;
  std::vector<double> sorted_norms(r, 0.0);
  for (std::size_t j = 0; j < r; ++j) {
    const std::size_t src = order[j];
    svals[j] = norms[src];
    sorted_norms[j] = norms[src];
    if (norms[src] > tiny) {
      for (std::size_t i = 0; i < w.rows(); ++i)
        wn(i, j) = w(i, src) / norms[src];
    }
    for (std::size_t i = 0; i < acc.rows(); ++i) accs(i, j) = acc(i, src);
  }
  complete_zero_columns(wn, sorted_norms, tiny);

  SvdResult out;
  if (!transposed) {
    out.left = std::move(wn);
    out.right = Subspace{m.cols(), r, std::move(accs)};
  } else {
    // m = acc · diag(s) · wnᵀ, so the right factor is wn.
    out.left = std::move(accs);
    out.right = Subspace{m.cols(), r, std::move(wn)};
  }
  out.singular_values = std::move(svals);

  // Sign convention: largest-magnitude entry of each right vector >= 0.
  for (std::size_t j = 0; j < r; ++j) {
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < out.right.basis.rows(); ++i) {
      const double a = std::abs(out.right.basis(i, j));
      if (a > best) {
        best = a;
        arg = i;
      }
    }
    if (out.right.basis(arg, j) < 0.0) {
      for (std::size_t i = 0; i < out.right.basis.rows(); ++i)
        out.right.basis(i, j) = -out.right.basis(i, j);
      for (std::size_t i = 0; i < out.left.rows(); ++i)
        out.left(i, j) = -out.left(i, j);
    }
  }
  return out;
}

SvdResult top_k_svd(const Matrix& m, std::size_t k) {
  require(!m.empty(), Status::kEmptyMatrix, "top_k_svd: empty matrix");
  require(m.all_finite(), Status::kNonFinite, "top_k_svd: non-finite entries");
  const std::size_t r = std::min(m.rows(), m.cols());
  require(k >= 1 && k <= r, Status::kBadK,
          "top_k_svd: k must be in 1..min(rows, cols)");
  SvdResult full = svd(m);
  SvdResult out;
  out.singular_values.assign(full.singular_values.begin(),
                             full.singular_values.begin() + k);
  out.left = Matrix(full.left.rows(), k);
  for (std::size_t i = 0; i < full.left.rows(); ++i)
    for (std::size_t j = 0; j < k; ++j) out.left(i, j) = full.left(i, j);
  Matrix rb(full.right.basis.rows(), k);
  for (std::size_t i = 0; i < rb.rows(); ++i)
    for (std::size_t j = 0; j < k; ++j) rb(i, j) = full.right.basis(i, j);
  out.right = Subspace{m.cols(), k, std::move(rb)};
  return out;
}

std::vector<double> singular_values(const Matrix& m) {
  return svd(m).singular_values;
}

PrincipalAngles principal_angles(const Subspace& a, const Subspace& b) {
  require(a.ambient_dim == b.ambient_dim, Status::kDimMismatch,
          "principal_angles: ambient dimensions disagree");
  require(a.k == b.k, Status::kDimMismatch,
          "principal_angles: subspace dimensions disagree");
  const Matrix cross = matmul(transpose(a.basis), b.basis);  // k x k
  const std::vector<double> sv = svd(cross).singular_values;
  PrincipalAngles out;
  out.angles.reserve(sv.size());
  for (double s : sv) {
    const double c = std::min(1.0, std::max(0.0, s));
    out.angles.push_back(std::acos(c));
  }
  return out;
}

double projection_metric(const PrincipalAngles& angles) {
  double s = 0.0;
  for (double th : angles.angles) {
    const double si = std::sin(th);
    s += si * si;
  }
  return std::sqrt(s);
}

double projection_metric(const Subspace& a, const Subspace& b) {
  return projection_metric(principal_angles(a, b));
}

double spectral_norm(const Matrix& m) {
  require(m.all_finite(), Status::kNonFinite,
          "spectral_norm: non-finite entries");
  if (m.empty()) return 0.0;
  const Matrix b = m.cols() <= m.rows() ? gram(m) : gram(transpose(m));
  const std::size_t n = b.rows();
  if (max_abs(b) == 0.0) return 0.0;

  Rng rng(0x5eedf00dULL);
  std::vector<double> v(n);
  double nrm = 0.0;
  for (double& x : v) {
    x = rng.normal();
    nrm += x * x;
  }
  nrm = std::sqrt(nrm);
  for (double& x : v) x /= nrm;

  double lambda = 0.0;
  int quiet = 0;
  std::vector<double> w(n);
  for (int it = 0; it < 50000; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += b(i, j) * v[j];
      w[i] = s;
    }
    double wn = 0.0;
    for (double x : w) wn += x * x;
    wn = std::sqrt(wn);
    if (wn == 0.0) return 0.0;
    const double prev = lambda;
    lambda = wn;  // |Bv| with |v| = 1 converges to the top eigenvalue
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / wn;
    if (std::abs(lambda - prev) <= 1e-15 * lambda) {
      if (++quiet >= 3) break;
    } else {
      quiet = 0;
    }
  }
  return std::sqrt(lambda);
}

SymmetricEigen symmetric_eigen(const Matrix& a) {
  require(a.rows() == a.cols(), Status::kDimMismatch,
          "symmetric_eigen: matrix must be square");
  require(a.all_finite(), Status::kNonFinite,
          "symmetric_eigen: non-finite entries");
  const std::size_t n = a.rows();
  Matrix d = a;
  Matrix q = Matrix::identity(n);
  const double scale = max_abs(a);
  if (scale > 0.0) {
    for (int sweep = 0; sweep < kJacobiMaxSweeps; ++sweep) {
      bool rotated = false;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          const double dij = d(i, j);
          if (std::abs(dij) <= kJacobiTol * scale) continue;
          rotated = true;
          const double tau = (d(j, j) - d(i, i)) / (2.0 * dij);
          const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                           (std::abs(tau) + std::sqrt(1.0 + tau * tau));
          const double c = 1.0 / std::sqrt(1.0 + t * t);
          const double s = c * t;
          // Apply J(i, j, theta) on both sides of d.
          for (std::size_t r = 0; r < n; ++r) {
            const double dri = d(r, i), drj = d(r, j);
            d(r, i) = c * dri - s * drj;
            d(r, j) = s * dri + c * drj;
          }
          for (std::size_t cidx = 0; cidx < n; ++cidx) {
            const double dic = d(i, cidx), djc = d(j, cidx);
            d(i, cidx) = c * dic - s * djc;
            d(j, cidx) = s * dic + c * djc;
          }
          for (std::size_t r = 0; r < n; ++r) {
            const double qri = q(r, i), qrj = q(r, j);
            q(r, i) = c * qri - s * qrj;
            q(r, j) = s * qri + c * qrj;
          }
        }
      }
      if (!rotated) break;
    }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return d(x, x) > d(y, y);
  });
  SymmetricEigen out;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = d(order[j], order[j]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = q(i, order[j]);
  }
  return out;
}

Matrix projector(const Subspace& s) {
  return matmul(s.basis, transpose(s.basis));
}

Subspace extend_basis(const Subspace& s, std::size_t k) {
  require(k <= s.ambient_dim, Status::kBadK,
          "extend_basis: k exceeds the ambient dimension");
  if (k <= s.k) return s;
  const std::size_t dim = s.ambient_dim;
  Matrix b(dim, k);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < s.k; ++j) b(i, j) = s.basis(i, j);
  std::vector<double> norms(k, 1.0);
  for (std::size_t j = s.k; j < k; ++j) norms[j] = 0.0;
  complete_zero_columns(b, norms, 0.5);
  return Subspace{dim, k, std::move(b)};
}

bool is_orthonormal(const Matrix& basis, double tol) {
  const Matrix g = gram(basis);
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = 0; j < g.cols(); ++j) {
      const double want = i == j ? 1.0 : 0.0;
      if (std::abs(g(i, j) - want) > tol) return false;
    }
  return true;
}

}  // namespace gsdlab
