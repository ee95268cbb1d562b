#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "oslobs/error.hpp"
#include "oslobs/matrixcore.hpp"
#include "test_util.hpp"

using namespace oslobs;
namespace ot = oslobs::testing;

namespace {

Matrix mat(int r, int c, std::initializer_list<double> v) {
  Matrix m(r, c);
  auto it = v.begin();
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = *it++;
  return m;
}

// Roots of the characteristic polynomial, solved in closed form.
std::vector<double> charpoly_roots_2(const Matrix& m) {
  const double tr = m(0, 0) + m(1, 1);
  const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
  return {tr / 2.0 - disc, tr / 2.0 + disc};
}

// Trigonometric solution of the symmetric 3x3 cubic.
std::vector<double> charpoly_roots_3(const Matrix& m) {
  const double q = m.trace() / 3.0;
  const Matrix b = m - q * Matrix::Identity(3, 3);
  const double p = std::sqrt((b.array().square().sum()) / 6.0);
  if (p == 0.0) return {q, q, q};
  const double r = std::clamp((b / p).determinant() / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  std::vector<double> e = {q + 2 * p * std::cos(phi), q + 2 * p * std::cos(phi + 2 * std::numbers::pi / 3),
                           q + 2 * p * std::cos(phi + 4 * std::numbers::pi / 3)};
  std::sort(e.begin(), e.end());
  return e;
}

}  // namespace

TEST(SymSpectrum, Identity) {
  const auto s = sym_spectrum(Matrix::Identity(3, 3));
  for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(s.eigenvalues(i), 1.0);
}

TEST(SymSpectrum, Diagonal) {
  const auto s = sym_spectrum(mat(2, 2, {-2, 0, 0, 5}));
  EXPECT_DOUBLE_EQ(s.min, -2.0);
  EXPECT_DOUBLE_EQ(s.max, 5.0);
}

TEST(SymSpectrum, TwoByTwo) {
  const auto s = sym_spectrum(mat(2, 2, {2, 1, 1, 2}));
  EXPECT_NEAR(s.eigenvalues(0), 1.0, 1e-14);
  EXPECT_NEAR(s.eigenvalues(1), 3.0, 1e-14);
}

TEST(SymSpectrum, Errors) {
  try {
    sym_spectrum(Matrix(2, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonSquare);
  }
  try {
    sym_spectrum(mat(2, 2, {1, 1, 0, 1}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AsymmetricBeyondTol);
  }
  try {
    sym_spectrum(mat(1, 1, {std::nan("")}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonFinite);
  }
  // Asymmetry below the tolerance is symmetrized away.
  EXPECT_NO_THROW(sym_spectrum(mat(2, 2, {1, 1e-12, 0, 1})));
}

TEST(SymSpectrum, MatchesCharacteristicPolynomial) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 500; ++k) {
    const Matrix m2 = ot::random_symmetric(rng, 2, 3.0);
    const auto r2 = charpoly_roots_2(m2);
    const auto s2 = sym_spectrum(m2);
    for (int i = 0; i < 2; ++i) EXPECT_NEAR(s2.eigenvalues(i), r2[i], 1e-8);

    const Matrix m3 = ot::random_symmetric(rng, 3, 3.0);
    const auto r3 = charpoly_roots_3(m3);
    const auto s3 = sym_spectrum(m3);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(s3.eigenvalues(i), r3[i], 1e-8);
  }
}

TEST(SymSpectrum, LargerMatchesEigen) {
  std::mt19937_64 rng(12);
  for (int n : {4, 6, 10, 16}) {
    const Matrix m = ot::random_symmetric(rng, n);
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    const auto s = sym_spectrum(m);
    EXPECT_LT((s.eigenvalues - es.eigenvalues()).cwiseAbs().maxCoeff(), 1e-10) << n;
  }
}

TEST(SymSpectrum, FloatScalar) {
  const Eigen::MatrixXf m = (Eigen::MatrixXf(2, 2) << 2, 1, 1, 2).finished();
  const auto s = sym_spectrum(m);
  EXPECT_NEAR(s.max, 3.0f, 1e-5f);
}

TEST(SpectralNorm, Examples) {
  EXPECT_EQ(spectral_norm(Matrix::Zero(3, 3)), 0.0);
  EXPECT_NEAR(spectral_norm(mat(2, 2, {1, 0, 1, 0})), std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(spectral_norm(mat(2, 2, {0, 1, -1, 0})), 1.0, 1e-14);
}

TEST(SpectralNorm, RectangularMatchesSvd) {
  std::mt19937_64 rng(13);
  for (int k = 0; k < 100; ++k) {
    const Matrix m = ot::random_matrix(rng, ot::uniform_int(rng, 1, 6), ot::uniform_int(rng, 1, 6));
    Eigen::JacobiSVD<Matrix> svd(m);
    EXPECT_NEAR(spectral_norm(m), svd.singularValues()(0), 1e-9);
  }
}

TEST(LogNorm, Examples) {
  EXPECT_DOUBLE_EQ(log_norm2(Matrix::Identity(4, 4)), 1.0);
  EXPECT_NEAR(log_norm2(mat(2, 2, {0, 1, -1, 0})), 0.0, 1e-15);
  EXPECT_NEAR(log_norm2(mat(2, 2, {1, 0, 1, 0})), (1.0 + std::sqrt(2.0)) / 2.0, 1e-14);
}

TEST(LogNorm, FanOrdering) {
  std::mt19937_64 rng(14);
  for (int k = 0; k < 1000; ++k) {
    const int n = ot::uniform_int(rng, 1, 6);
    const Matrix m = ot::random_matrix(rng, n, n, ot::uniform(rng, 0.1, 10.0));
    EXPECT_LE(log_norm2(m), spectral_norm(m) + 1e-12);
  }
}

TEST(LogNorm, EigenvalueSandwich) {
  std::mt19937_64 rng(15);
  for (int k = 0; k < 300; ++k) {
    const int n = ot::uniform_int(rng, 1, 6);
    const Matrix m = ot::random_matrix(rng, n, n);
    Eigen::EigenSolver<Matrix> es(m, false);
    const double lo = -log_norm2(Matrix(-m));
    const double hi = log_norm2(m);
    for (int i = 0; i < n; ++i) {
      EXPECT_GE(es.eigenvalues()(i).real(), lo - 1e-10);
      EXPECT_LE(es.eigenvalues()(i).real(), hi + 1e-10);
    }
  }
}

TEST(LogNorm, SandwichOnKnownSpectrum) {
  // T diag(-3, 0.5, 2) T^-1 has exactly those eigenvalues.
  std::mt19937_64 rng(16);
  const Matrix T = ot::random_matrix(rng, 3, 3) + 3.0 * Matrix::Identity(3, 3);
  const Matrix m = T * Vector(Eigen::Vector3d(-3, 0.5, 2)).asDiagonal() * T.inverse();
  EXPECT_LE(-log_norm2(Matrix(-m)), -3.0 + 1e-10);
  EXPECT_GE(log_norm2(m), 2.0 - 1e-10);
  EXPECT_NEAR(max_real_eigenvalue(m), 2.0, 1e-9);
}

TEST(PseudoInverse, Examples) {
  const Matrix c1 = right_pseudo_inverse(mat(1, 2, {0, 1}));
  EXPECT_TRUE(c1.isApprox(mat(2, 1, {0, 1})));
  EXPECT_TRUE(right_pseudo_inverse(Matrix::Identity(3, 3)).isApprox(Matrix::Identity(3, 3)));
  EXPECT_TRUE(right_pseudo_inverse(mat(1, 2, {1, 1})).isApprox(mat(2, 1, {0.5, 0.5})));
}

TEST(PseudoInverse, RankDeficient) {
  try {
    right_pseudo_inverse(mat(2, 2, {1, 2, 2, 4}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RankDeficient);
  }
}

TEST(KernelProjector, Examples) {
  EXPECT_TRUE(kernel_projector(mat(1, 2, {0, 1})).isApprox(mat(2, 2, {1, 0, 0, 0})));
  EXPECT_LT(kernel_projector(Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_TRUE(kernel_projector(mat(1, 2, {1, 1})).isApprox(mat(2, 2, {0.5, -0.5, -0.5, 0.5})));
}

TEST(KernelProjector, Laws) {
  std::mt19937_64 rng(17);
  for (int k = 0; k < 500; ++k) {
    const int n = ot::uniform_int(rng, 1, 6);
    const int p = ot::uniform_int(rng, 1, n);
    const Matrix C = ot::random_matrix(rng, p, n);
    const Matrix P = kernel_projector(C);
    EXPECT_LT((P - P.transpose()).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((P * P - P).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((C * P).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Definiteness, Examples) {
  EXPECT_TRUE(is_negative_definite(Matrix(-Matrix::Identity(2, 2)), 0.0));
  EXPECT_FALSE(is_negative_definite(Matrix::Zero(2, 2), 0.0));
  EXPECT_FALSE(is_negative_definite(mat(2, 2, {-1, 0, 0, -1e-12}), 1e-9));
  EXPECT_TRUE(is_positive_definite(Matrix::Identity(2, 2)));
}

TEST(Lyapunov, SolvesEquation) {
  std::mt19937_64 rng(18);
  for (int k = 0; k < 50; ++k) {
    const int n = ot::uniform_int(rng, 1, 5);
    const Matrix M = ot::random_matrix(rng, n, n) - 4.0 * Matrix::Identity(n, n);
    const Matrix Q = Matrix::Identity(n, n);
    const Matrix P = solve_lyapunov(M, Q);
    EXPECT_LT((M.transpose() * P + P * M + Q).cwiseAbs().maxCoeff(), 1e-9);
  }
}
