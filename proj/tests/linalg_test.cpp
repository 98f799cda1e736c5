#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "snl/error.hpp"
#include "snl/linalg.hpp"
#include "support.hpp"

namespace snl {
namespace {

using testing::random_spd;

Matrix naive_product(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j)
      for (std::size_t k = 0; k < a.cols(); ++k) c(i, j) += a(i, k) * b(k, j);
  return c;
}

Eigen::MatrixXd to_eigen(const Matrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  return e;
}

void expect_eig_invariants(const SymMatrix& m, const EigDecomp& e) {
  const std::size_t n = m.dim();
  const Matrix vtv = matmul_tn(e.vectors, e.vectors);
  EXPECT_LE(testing::max_abs_diff(vtv, Matrix::identity(n)), 1e-10);
  for (std::size_t i = 0; i + 1 < n; ++i) EXPECT_GE(e.values[i], e.values[i + 1]);
  for (std::size_t i = 0; i < n; ++i) {
    double res = 0.0;
    for (std::size_t row = 0; row < n; ++row) {
      double mv = 0.0;
      for (std::size_t k = 0; k < n; ++k) mv += m(row, k) * e.vectors(k, i);
      const double d = mv - e.values[i] * e.vectors(row, i);
      res += d * d;
    }
    EXPECT_LE(std::sqrt(res), 1e-8 * (1.0 + std::abs(e.values[i])));
  }
}

TEST(Matrix, ProductsMatchTripleLoop) {
  Rng rng(1);
  const Matrix a = gaussian_matrix(5, 4, rng);
  const Matrix b = gaussian_matrix(4, 3, rng);
  const Matrix c = gaussian_matrix(5, 3, rng);
  EXPECT_MATRIX_NEAR(matmul(a, b), naive_product(a, b), 1e-13);
  EXPECT_MATRIX_NEAR(matmul_tn(a, c), naive_product(a.transposed(), c), 1e-13);
  EXPECT_MATRIX_NEAR(matmul_nt(a, a), naive_product(a, a.transposed()), 1e-13);
  EXPECT_THROW(matmul(a, a), InputError);
}

TEST(Matrix, SymMatrixSymmetrizesAndRejectsBadShapes) {
  const SymMatrix s(Matrix{{1.0, 2.0}, {4.0, 3.0}});
  EXPECT_EQ(s(0, 1), 3.0);
  EXPECT_EQ(s(1, 0), 3.0);
  EXPECT_THROW(SymMatrix(Matrix(2, 3)), InputError);
  EXPECT_THROW(SymMatrix{Matrix{}}, InputError);
}

TEST(SymEig, IdentityGivesUnitValuesAndOrthonormalBasis) {
  const SymMatrix m(Matrix::identity(3));
  const EigDecomp e = sym_eig(m);
  for (double v : e.values) EXPECT_DOUBLE_EQ(v, 1.0);
  expect_eig_invariants(m, e);
}

TEST(SymEig, DiagonalInputReturnsSignedStandardBasis) {
  const SymMatrix m(Matrix{{1.0, 0.0, 0.0}, {0.0, 3.0, 0.0}, {0.0, 0.0, 2.0}});
  const EigDecomp e = sym_eig(m);
  EXPECT_EQ(e.values, (std::vector<double>{3.0, 2.0, 1.0}));
  EXPECT_MATRIX_NEAR(e.vectors, (Matrix{{0, 0, 1}, {1, 0, 0}, {0, 1, 0}}), 0.0);
}

TEST(SymEig, TwoByTwoMatchesCharacteristicRoots) {
  const EigDecomp e = sym_eig(SymMatrix(Matrix{{2.0, 1.0}, {1.0, 2.0}}));
  EXPECT_NEAR(e.values[0], 3.0, 1e-14);
  EXPECT_NEAR(e.values[1], 1.0, 1e-14);
  const double h = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(std::abs(e.vectors(0, 0)), h, 1e-14);
  EXPECT_NEAR(e.vectors(0, 0) * e.vectors(1, 0), 0.5, 1e-14);
  EXPECT_NEAR(e.vectors(0, 1) * e.vectors(1, 1), -0.5, 1e-14);
}

TEST(SymEig, SignConventionMakesLargestEntryPositive) {
  Rng rng(5);
  const EigDecomp e = sym_eig(random_spd(7, rng));
  for (std::size_t j = 0; j < 7; ++j) {
    std::size_t arg = 0;
    for (std::size_t i = 1; i < 7; ++i)
      if (std::abs(e.vectors(i, j)) > std::abs(e.vectors(arg, j))) arg = i;
    EXPECT_GT(e.vectors(arg, j), 0.0);
  }
}

TEST(SymEig, AgreesWithEigenOracleOnRandomSymmetric) {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial) % 14;
    const SymMatrix m(gaussian_matrix(n, n, rng));
    const EigDecomp e = sym_eig(m);
    expect_eig_invariants(m, e);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> oracle(to_eigen(m.mat()));
    for (std::size_t i = 0; i < n; ++i)
      EXPECT_NEAR(e.values[i], oracle.eigenvalues()(static_cast<Eigen::Index>(n - 1 - i)), 1e-10);
  }
}

TEST(SymEig, DeterministicAndRejectsNonFinite) {
  Rng rng(2);
  const SymMatrix m(gaussian_matrix(6, 6, rng));
  const EigDecomp a = sym_eig(m);
  const EigDecomp b = sym_eig(m);
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.vectors, b.vectors);
  Matrix bad = Matrix::identity(2);
  bad(0, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(sym_eig(SymMatrix(bad)), InputError);
}

TEST(ThinSvd, ColumnVector) {
  const SvdDecomp s = thin_svd(Matrix{{3.0}, {4.0}});
  ASSERT_EQ(s.s.size(), 1u);
  EXPECT_NEAR(s.s[0], 5.0, 1e-14);
  EXPECT_NEAR(s.u(0, 0) * s.vt(0, 0), 0.6, 1e-14);
  EXPECT_NEAR(s.u(1, 0) * s.vt(0, 0), 0.8, 1e-14);
  EXPECT_NEAR(std::abs(s.vt(0, 0)), 1.0, 1e-14);
}

TEST(ThinSvd, StackedIdentityHasUnitSingularValues) {
  Matrix m(5, 3);
  for (std::size_t i = 0; i < 3; ++i) m(i, i) = 1.0;
  for (double v : thin_svd(m).s) EXPECT_NEAR(v, 1.0, 1e-15);
}

TEST(ThinSvd, ReconstructsRandomAndMatchesEigen) {
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix m = gaussian_matrix(5 + trial, 2 + trial % 3, rng);
    const SvdDecomp s = thin_svd(m);
    Matrix us = s.u;
    for (std::size_t i = 0; i < us.rows(); ++i)
      for (std::size_t j = 0; j < us.cols(); ++j) us(i, j) *= s.s[j];
    EXPECT_MATRIX_NEAR(matmul(us, s.vt), m, 1e-10);
    EXPECT_MATRIX_NEAR(matmul_tn(s.u, s.u), Matrix::identity(m.cols()), 1e-12);
    Eigen::JacobiSVD<Eigen::MatrixXd> oracle(to_eigen(m));
    for (std::size_t j = 0; j < s.s.size(); ++j)
      EXPECT_NEAR(s.s[j], oracle.singularValues()(static_cast<Eigen::Index>(j)), 1e-10);
  }
}

TEST(ThinSvd, RankDeficientKeepsOrthonormalU) {
  Matrix m(4, 3);
  for (std::size_t i = 0; i < 4; ++i) {
    m(i, 0) = static_cast<double>(i + 1);
    m(i, 1) = 2.0 * static_cast<double>(i + 1);
  }
  const SvdDecomp s = thin_svd(m);
  EXPECT_EQ(s.s[1], 0.0);
  EXPECT_EQ(s.s[2], 0.0);
  EXPECT_MATRIX_NEAR(matmul_tn(s.u, s.u), Matrix::identity(3), 1e-12);
}

TEST(ThinSvd, AgreesWithSymEigOnPsd) {
  Rng rng(4);
  const SymMatrix m = random_spd(6, rng);
  const EigDecomp e = sym_eig(m);
  const SvdDecomp s = thin_svd(m.mat());
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(s.s[i], e.values[i], 1e-9);
}

TEST(Procrustes, IdentityAndRotatedCopies) {
  Rng rng(6);
  const Matrix y = gaussian_matrix(6, 3, rng);
  const ProcrustesResult same = procrustes_align(y, y);
  EXPECT_MATRIX_NEAR(same.q, Matrix::identity(3), 1e-12);
  EXPECT_NEAR(same.dist, 0.0, 1e-12);
  const Matrix o = random_orthogonal(3, rng);
  EXPECT_LE(procrustes_align(y, matmul(y, o)).dist, 1e-10);
}

TEST(Procrustes, RankOneSignMatchesBruteForce) {
  const Matrix y1{{1.0}, {0.0}};
  const Matrix y2{{-1.0}, {0.0}};
  const ProcrustesResult p = procrustes_align(y1, y2);
  EXPECT_NEAR(p.q(0, 0), -1.0, 1e-15);
  EXPECT_NEAR(p.dist, 0.0, 1e-15);
  Rng rng(9);
  for (int t = 0; t < 20; ++t) {
    const Matrix a = gaussian_matrix(4, 1, rng);
    const Matrix b = gaussian_matrix(4, 1, rng);
    const double brute = std::min(frobenius_norm(b - a), frobenius_norm(b * -1.0 - a));
    EXPECT_NEAR(procrustes_align(a, b).dist, brute, 1e-12);
  }
}

TEST(Procrustes, SingularCrossProductIsFlaggedNotUnique) {
  const Matrix y1{{1.0, 0.0}, {0.0, 0.0}, {0.0, 1.0}};
  const Matrix y2{{1.0, 0.0}, {0.0, 1.0}, {0.0, 0.0}};
  const ProcrustesResult p = procrustes_align(y1, y2);
  EXPECT_FALSE(p.unique);
  EXPECT_MATRIX_NEAR(matmul_tn(p.q, p.q), Matrix::identity(2), 1e-12);
  EXPECT_THROW(procrustes_align(y1, Matrix(3, 1)), InputError);
}

TEST(Procrustes, SymmetricAndLeftOrthogonalInvariant) {
  Rng rng(10);
  for (int t = 0; t < 20; ++t) {
    const Matrix a = gaussian_matrix(7, 3, rng);
    const Matrix b = gaussian_matrix(7, 3, rng);
    const Matrix p = random_orthogonal(7, rng);
    const double d = procrustes_align(a, b).dist;
    EXPECT_NEAR(d, procrustes_align(b, a).dist, 1e-10);
    EXPECT_NEAR(d, procrustes_align(matmul(p, a), matmul(p, b)).dist, 1e-10);
  }
}

TEST(FrobeniusInequality, BoundedBySingularValuesOfPsdFactor) {
  Rng rng(12);
  for (int t = 0; t < 50; ++t) {
    const Matrix a = gaussian_matrix(4, 5, rng);
    const SymMatrix b = random_spd(5, rng, 0.1, 3.0);
    const auto s = singular_values(b.mat());
    const double ab = frobenius_norm(matmul(a, b.mat()));
    EXPECT_LE(frobenius_norm(a) * s.back(), ab * (1.0 + 1e-12));
    EXPECT_LE(ab, frobenius_norm(a) * s.front() * (1.0 + 1e-12));
  }
}

TEST(PrincipalAngles, SameSpanIsZeroOrthogonalSpanIsOne) {
  Rng rng(13);
  const Matrix q = random_orthogonal(5, rng);
  const Matrix u = leading_columns(q, 2);
  const Matrix rotated = matmul(u, random_orthogonal(2, rng));
  EXPECT_LE(max_principal_angle_sine(u, rotated), 1e-12);
  Matrix w(5, 2);
  for (std::size_t i = 0; i < 5; ++i) {
    w(i, 0) = q(i, 2);
    w(i, 1) = q(i, 3);
  }
  EXPECT_NEAR(max_principal_angle_sine(u, w), 1.0, 1e-12);
}

TEST(SpectralNorm, MatchesLargestSingularValue) {
  EXPECT_NEAR(spectral_norm(Matrix{{3.0, 0.0}, {0.0, -4.0}}), 4.0, 1e-14);
  EXPECT_NEAR(spectral_norm(Matrix{{1.0, 1.0}}), std::sqrt(2.0), 1e-14);
}

}  // namespace
}  // namespace snl
