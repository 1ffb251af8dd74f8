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

#include <cmath>

#include <doctest.h>

#include "common/oracles.hpp"
#include "core/linalg.hpp"
#include "core/rng.hpp"

using namespace gsdlab;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Matrix m(r, c);
  for (double& v : m.data()) v = rng.normal();
  return m;
}

Subspace random_subspace(std::size_t p, std::size_t k, Rng& rng) {
  return orthonormalize(random_matrix(p, k, rng));
}

// Random k x k orthogonal matrix (QR of a Gaussian).
Matrix random_orthogonal(std::size_t k, Rng& rng) {
  return orthonormalize(random_matrix(k, k, rng)).basis;
}

}  // namespace

TEST_SUITE("linalg") {

TEST_CASE("orthonormalize keeps an identity basis") {
  const Subspace s = orthonormalize(Matrix::identity(3));
  CHECK(s.k == 3);
  CHECK(max_abs(s.basis - Matrix::identity(3)) == 0.0);
}

TEST_CASE("orthonormalize spans (2e1, e1+e2) as {e1, e2}") {
  Matrix m(3, 2);
  m(0, 0) = 2.0;
  m(0, 1) = 1.0;
  m(1, 1) = 1.0;
  const Subspace s = orthonormalize(m);
  // Projector onto span must match projector onto {e1, e2}.
  Matrix want(3, 3);
  want(0, 0) = want(1, 1) = 1.0;
  CHECK(max_abs(projector(s) - want) < 1e-10);
  // And the input columns must be reproduced by the projector.
  const Matrix residual = m - matmul(projector(s), m);
  CHECK(max_abs(residual) < 1e-10);
}

TEST_CASE("orthonormalize on random 20x5") {
  Rng rng(11);
  const Matrix m = random_matrix(20, 5, rng);
  const Subspace s = orthonormalize(m);
  CHECK(max_abs(gram(s.basis) - Matrix::identity(5)) < 1e-10);
  const Matrix residual = m - matmul(projector(s), m);
  CHECK(max_abs(residual) < 1e-8 * max_abs(m));
}

TEST_CASE("orthonormalize rejects rank-deficient input") {
  Matrix m(4, 2);
  for (std::size_t i = 0; i < 4; ++i) {
    m(i, 0) = 1.0 + static_cast<double>(i);
    m(i, 1) = 2.0 * m(i, 0);  // exact multiple
  }
  CHECK_THROWS_AS(orthonormalize(m), Error);
  try {
    orthonormalize(m);
  } catch (const Error& e) {
    CHECK(e.status() == Status::kRankDeficient);
  }
}

TEST_CASE("top_k_svd on a diagonal matrix") {
  Matrix m(3, 3);
  m(0, 0) = 3.0;
  m(1, 1) = 2.0;
  m(2, 2) = 1.0;
  const SvdResult r = top_k_svd(m, 2);
  CHECK(r.singular_values[0] == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(r.singular_values[1] == doctest::Approx(2.0).epsilon(1e-14));
  // Right basis is (e1, e2) up to the (fixed) sign convention.
  CHECK(std::abs(r.right.basis(0, 0)) == doctest::Approx(1.0));
  CHECK(std::abs(r.right.basis(1, 1)) == doctest::Approx(1.0));
  // Sign convention: largest-magnitude entry non-negative.
  CHECK(r.right.basis(0, 0) > 0.0);
}

TEST_CASE("top_k_svd on a rank-1 outer product") {
  Rng rng(3);
  std::vector<double> u(7), v(5);
  for (double& x : u) x = rng.normal();
  for (double& x : v) x = rng.normal();
  Matrix m(7, 5);
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t j = 0; j < 5; ++j) m(i, j) = u[i] * v[j];
  const double nu = norm2(u), nv = norm2(v);
  const SvdResult r = top_k_svd(m, 1);
  CHECK(r.singular_values[0] == doctest::Approx(nu * nv).epsilon(1e-12));
  // Right vector is v/|v| up to sign.
  double dp = 0.0;
  for (std::size_t j = 0; j < 5; ++j) dp += r.right.basis(j, 0) * v[j] / nv;
  CHECK(std::abs(dp) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("top_k_svd matches the Gram eigensolver oracle") {
  Rng rng(17);
  const Matrix m = random_matrix(8, 6, rng);
  const SvdResult r = top_k_svd(m, 3);
  const std::vector<double> want = oracle::singular_values_via_gram(m);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(std::abs(r.singular_values[i] - want[i]) < 1e-8);
  // Subspace agreement through |cos| of principal angles.
  const Matrix oracle_basis = oracle::top_right_subspace_via_gram(m, 3);
  const Subspace vo{6, 3, oracle_basis};
  const PrincipalAngles pa = principal_angles(r.right, vo);
  for (double a : pa.angles) CHECK(std::abs(std::cos(a) - 1.0) < 1e-6);
}

TEST_CASE("top_k_svd reconstruction and orthonormality on random shapes") {
  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = 2 + rng.below(10);
    const std::size_t p = 2 + rng.below(10);
    const Matrix g = random_matrix(m, p, rng);
    const SvdResult full = svd(g);
    CHECK(is_orthonormal(full.left, 1e-10));
    CHECK(is_orthonormal(full.right.basis, 1e-10));
    Matrix us = full.left;
    for (std::size_t i = 0; i < us.rows(); ++i)
      for (std::size_t j = 0; j < us.cols(); ++j)
        us(i, j) *= full.singular_values[j];
    const Matrix rec = matmul(us, transpose(full.right.basis));
    CHECK(max_abs(rec - g) < 1e-8 * full.singular_values[0]);
    for (std::size_t i = 1; i < full.singular_values.size(); ++i)
      CHECK(full.singular_values[i] <= full.singular_values[i - 1]);
  }
}

TEST_CASE("top_k_svd rejects bad k and non-finite input") {
  Matrix m(3, 2, 1.0);
  CHECK_THROWS_AS(top_k_svd(m, 0), Error);
  CHECK_THROWS_AS(top_k_svd(m, 3), Error);
  m(1, 1) = std::numeric_limits<double>::quiet_NaN();
  try {
    top_k_svd(m, 1);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.status() == Status::kNonFinite);
  }
}

TEST_CASE("principal angles: identical, orthogonal, planar") {
  Matrix e1(2, 1);
  e1(0, 0) = 1.0;
  Matrix e2(2, 1);
  e2(1, 0) = 1.0;
  const Subspace s1{2, 1, e1}, s2{2, 1, e2};
  CHECK(principal_angles(s1, s1).angles[0] == doctest::Approx(0.0));
  CHECK(principal_angles(s1, s2).angles[0] ==
        doctest::Approx(std::acos(0.0)).epsilon(1e-14));
  Matrix rot(2, 1);
  rot(0, 0) = std::cos(0.3);
  rot(1, 0) = std::sin(0.3);
  const Subspace s3{2, 1, rot};
  CHECK(principal_angles(s1, s3).angles[0] == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("principal angles reject dimension mismatches") {
  Rng rng(5);
  const Subspace a = random_subspace(6, 2, rng);
  const Subspace b = random_subspace(7, 2, rng);
  const Subspace c = random_subspace(6, 3, rng);
  CHECK_THROWS_AS(principal_angles(a, b), Error);
  CHECK_THROWS_AS(principal_angles(a, c), Error);
}

TEST_CASE("projection metric basics") {
  Rng rng(9);
  const Subspace a = random_subspace(10, 3, rng);
  CHECK(projection_metric(a, a) == doctest::Approx(0.0).epsilon(1e-12));

  // k=2, p=4, sharing exactly one direction -> distance 1.
  Matrix b1(4, 2), b2(4, 2);
  b1(0, 0) = 1.0;
  b1(1, 1) = 1.0;
  b2(0, 0) = 1.0;
  b2(2, 1) = 1.0;
  CHECK(projection_metric(Subspace{4, 2, b1}, Subspace{4, 2, b2}) ==
        doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("projection metric equals the Frobenius projector identity") {
  Rng rng(31);
  const Subspace a = random_subspace(32, 4, rng);
  const Subspace b = random_subspace(32, 4, rng);
  const double d = projection_metric(a, b);
  const Matrix diff = projector(a) - projector(b);
  const double f = frobenius_norm(diff);
  CHECK(std::abs(d - std::sqrt(0.5 * f * f)) < 1e-9);
}

TEST_CASE("projection metric axioms on random triples") {
  Rng rng(101);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t p = 2 + rng.below(63);
    const std::size_t k = 1 + rng.below(std::min<std::size_t>(8, p));
    const Subspace v1 = random_subspace(p, k, rng);
    const Subspace v2 = random_subspace(p, k, rng);
    const Subspace v3 = random_subspace(p, k, rng);
    const double d12 = projection_metric(v1, v2);
    const double d21 = projection_metric(v2, v1);
    const double d13 = projection_metric(v1, v3);
    const double d23 = projection_metric(v2, v3);
    CHECK(projection_metric(v1, v1) < 1e-9);
    CHECK(std::abs(d12 - d21) < 1e-9);
    CHECK(d13 <= d12 + d23 + 1e-9);
    CHECK(d12 <= std::sqrt(static_cast<double>(k)) + 1e-12);
  }
}

TEST_CASE("projection metric is invariant under basis rotations") {
  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t p = 4 + rng.below(28);
    const std::size_t k = 1 + rng.below(std::min<std::size_t>(6, p - 1));
    const Subspace v1 = random_subspace(p, k, rng);
    const Subspace v2 = random_subspace(p, k, rng);
    const double d = projection_metric(v1, v2);
    const Matrix q = random_orthogonal(k, rng);
    const Subspace v1r{p, k, matmul(v1.basis, q)};
    CHECK(std::abs(projection_metric(v1r, v2) - d) < 1e-9);
  }
}

TEST_CASE("projection metric squared equals k minus the projector trace") {
  Rng rng(55);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t p = 4 + rng.below(28);
    const std::size_t k = 1 + rng.below(std::min<std::size_t>(6, p - 1));
    const Subspace v1 = random_subspace(p, k, rng);
    const Subspace v2 = random_subspace(p, k, rng);
    const double d = projection_metric(v1, v2);
    const Matrix prod = matmul(projector(v1), projector(v2));
    double tr = 0.0;
    for (std::size_t i = 0; i < p; ++i) tr += prod(i, i);
    CHECK(std::abs(d * d - (static_cast<double>(k) - tr)) < 1e-9);
  }
}

TEST_CASE("Eckart-Young: residual spectral norm equals s_{k+1}") {
  Rng rng(203);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t m = 3 + rng.below(14);
    const std::size_t p = 3 + rng.below(14);
    const std::size_t r = std::min(m, p);
    const std::size_t k = 1 + rng.below(r);
    const Matrix g = random_matrix(m, p, rng);
    const SvdResult sv = top_k_svd(g, k);
    const Matrix residual =
        g - matmul(matmul(g, sv.right.basis), transpose(sv.right.basis));
    const std::vector<double> all = singular_values(g);
    const double want = k < all.size() ? all[k] : 0.0;
    CHECK(std::abs(spectral_norm(residual) - want) < 1e-8);
  }
}

TEST_CASE("spectral norm basics and oracle agreement") {
  Matrix m(3, 3);
  m(0, 0) = 3.0;
  m(1, 1) = 2.0;
  m(2, 2) = 1.0;
  CHECK(spectral_norm(m) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(spectral_norm(Matrix(4, 5)) == 0.0);

  Rng rng(41);
  const Matrix g = random_matrix(10, 7, rng);
  CHECK(std::abs(spectral_norm(g) - oracle::spectral_norm_via_gram(g)) < 1e-8);

  Matrix bad(2, 2, 1.0);
  bad(0, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(spectral_norm(bad), Error);
}

TEST_CASE("symmetric_eigen matches the oracle") {
  Rng rng(83);
  const Matrix m = random_matrix(9, 9, rng);
  Matrix sym(9, 9);
  for (std::size_t i = 0; i < 9; ++i)
    for (std::size_t j = 0; j < 9; ++j) sym(i, j) = 0.5 * (m(i, j) + m(j, i));
  const SymmetricEigen got = symmetric_eigen(sym);
  const oracle::EigenPairs want = oracle::jacobi_eigen(sym);
  for (std::size_t i = 0; i < 9; ++i)
    CHECK(std::abs(got.values[i] - want.values[i]) < 1e-10);
  CHECK(is_orthonormal(got.vectors, 1e-10));
  // A v = lambda v for the top pair.
  for (std::size_t i = 0; i < 9; ++i) {
    double av = 0.0;
    for (std::size_t j = 0; j < 9; ++j) av += sym(i, j) * got.vectors(j, 0);
    CHECK(std::abs(av - got.values[0] * got.vectors(i, 0)) < 1e-9);
  }
}

TEST_CASE("csv writes round-trip exactly") {
  Rng rng(4);
  Matrix m(5, 3);
  for (double& v : m.data()) v = rng.normal() * std::pow(10.0, rng.uniform(-8, 8));
  m(0, 0) = 0.1;  // classic non-dyadic value
  m(1, 1) = -0.0;
  const Matrix back = matrix_from_csv_text(to_csv(m));
  REQUIRE(back.rows() == m.rows());
  REQUIRE(back.cols() == m.cols());
  for (std::size_t i = 0; i < m.data().size(); ++i) {
    // bit-exact round trip, including signed zero
    CHECK(std::memcmp(&back.data()[i], &m.data()[i], sizeof(double)) == 0);
  }
}

TEST_CASE("csv rejects ragged and non-numeric input") {
  CHECK_THROWS_AS(matrix_from_csv_text("1,2\n3\n"), Error);
  CHECK_THROWS_AS(matrix_from_csv_text("1,abc\n"), Error);
  CHECK_THROWS_AS(matrix_from_csv_text("1,inf\n"), Error);
}

}  // TEST_SUITE
