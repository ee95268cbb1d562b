#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oslobs/error.hpp"
#include "oslobs/synthesis.hpp"
#include "test_util.hpp"

using namespace oslobs;
namespace ot = oslobs::testing;

namespace {

Matrix ex3_A() { return (Matrix(2, 2) << 1, -1, 1, 1).finished(); }
Matrix ex3_C() { return (Matrix(1, 2) << 0, 1).finished(); }

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no oslobs::Error thrown";
  return ErrorCode::NonFinite;
}

}  // namespace

TEST(MinGain, Example3) {
  const MinGain g = min_gain(ex3_A(), ex3_C());
  EXPECT_NEAR(g.L(0, 0), -1.0, 1e-15);
  EXPECT_NEAR(g.L(1, 0), 1.0, 1e-15);
  EXPECT_NEAR(g.sigma_star, std::sqrt(2.0), 1e-14);
  const Matrix M = ex3_A() - g.L * ex3_C();
  EXPECT_TRUE(M.isApprox((Matrix(2, 2) << 1, 0, 1, 0).finished()));
}

TEST(MinGain, FullObservation) {
  std::mt19937_64 rng(1);
  const Matrix A = ot::random_matrix(rng, 3, 3);
  const MinGain g = min_gain(A, Matrix::Identity(3, 3));
  EXPECT_LT((g.L - A).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT(g.sigma_star, 1e-14);
}

TEST(MinGain, OptimalAgainstRandomGains) {
  std::mt19937_64 rng(2);
  for (int k = 0; k < 1000; ++k) {
    const int n = ot::uniform_int(rng, 1, 5);
    const int p = ot::uniform_int(rng, 1, n);
    const Matrix A = ot::random_matrix(rng, n, n);
    const Matrix C = ot::random_matrix(rng, p, n);
    const MinGain g = min_gain(A, C);
    const Matrix L = ot::random_matrix(rng, n, p, 3.0);
    EXPECT_LE(g.sigma_star, spectral_norm(Matrix(A - L * C)) + 1e-10);
  }
}

TEST(MinGain, ProjectorIdentity) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 500; ++k) {
    const int n = ot::uniform_int(rng, 1, 5);
    const int p = ot::uniform_int(rng, 1, n);
    const Matrix A = ot::random_matrix(rng, n, n);
    const Matrix C = ot::random_matrix(rng, p, n);
    const Matrix L = ot::random_matrix(rng, n, p);
    const Matrix Pi = kernel_projector(C);
    EXPECT_LT(((A - L * C) * Pi - A * Pi).cwiseAbs().maxCoeff(), 1e-10 * (1 + L.norm() * C.norm()));
  }
}

TEST(Window, Example3) {
  const FeasibilityWindow w = feasibility_window(0.0, -200.0, -141.0, 70.6, std::sqrt(2.0));
  ASSERT_FALSE(w.empty);
  EXPECT_NEAR(w.lambda_low, 1.0 - 1.0 / (70.6 * 70.6), 1e-12);
  EXPECT_DOUBLE_EQ(w.lambda_high, 1.0);
  EXPECT_TRUE(w.contains(0.999892));
  EXPECT_FALSE(w.contains(0.5));
}

TEST(Window, EmptyCases) {
  EXPECT_TRUE(feasibility_window(0.0, -200.0, -141.0, 70.5, std::sqrt(2.0)).empty);  // gamma + 2 alpha = 0
  for (double alpha : {0.01, 0.5, 1.0, 10.0, 1000.0}) {
    EXPECT_TRUE(feasibility_window(0.0, 0.0, -1.0, alpha, 0.0).empty) << alpha;
  }
}

TEST(Window, BoundsMatchHandFormula) {
  std::mt19937_64 rng(4);
  for (int k = 0; k < 500; ++k) {
    const double rho = ot::uniform(rng, -2, 2), beta = ot::uniform(rng, -10, 2);
    const double alpha = std::pow(10.0, ot::uniform(rng, -1, 2));
    const double gamma = ot::uniform(rng, -2 * alpha + 0.01, 5);
    const double s = ot::uniform(rng, 0, 2);
    const FeasibilityWindow w = feasibility_window(rho, beta, gamma, alpha, s);
    const double xi = (beta + 1) + rho * (gamma + 2 * alpha);
    const double low = std::max({xi + 2 * alpha * s, 1 - 1 / (alpha * alpha), 0.0});
    if (low < 1.0 - 1e-6) {
      ASSERT_FALSE(w.empty);
      EXPECT_NEAR(w.lambda_low, low, 1e-12);
    } else if (low >= 1.0) {
      EXPECT_TRUE(w.empty);
    }
  }
}

TEST(Design, Example3) {
  const ObserverDesign d = design_observer(ex3_A(), ex3_C(), 0.0, -200.0, -141.0, 70.6);
  EXPECT_NEAR(d.L(0, 0), -1.0, 1e-12);
  EXPECT_NEAR(d.L(1, 0), 1.0, 1e-12);
  EXPECT_GT(d.lambda, 0.999799);
  EXPECT_LT(d.lambda, 1.0);
  EXPECT_DOUBLE_EQ(d.xi, -199.0);
  EXPECT_EQ(d.alpha_policy, "given");
  EXPECT_TRUE(d.certificate.overall);
}

TEST(Design, StructurallyInfeasible) {
  EXPECT_EQ(code_of([] { design_observer(ex3_A(), ex3_C(), 0.0, 0.0, -1.0); }), ErrorCode::StructurallyInfeasible);
  EXPECT_EQ(code_of([] { design_observer(ex3_A(), ex3_C(), 0.0, 3.0, 7.0, 2.0); }),
            ErrorCode::StructurallyInfeasible);
}

TEST(Design, FullObservationWindowIsUnitInterval) {
  std::mt19937_64 rng(5);
  const ObserverDesign d = design_observer(ot::random_matrix(rng, 2, 2), Matrix::Identity(2, 2), 0.0, -1.5, 0.0, 1.0);
  EXPECT_DOUBLE_EQ(d.xi, -0.5);
  EXPECT_NEAR(d.window.lambda_low, 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(d.window.lambda_high, 1.0);
  EXPECT_NEAR(d.lambda, 0.5, 1e-15);
}

TEST(Design, AlphaPolicies) {
  const ObserverDesign r2 = design_observer(Matrix::Identity(2, 2), Matrix::Identity(2, 2), 0.0, -1.5, -1.0);
  EXPECT_EQ(r2.alpha_policy, "alpha_one");
  EXPECT_DOUBLE_EQ(r2.alpha, 1.0);

  const ObserverDesign sw = design_observer(ex3_A(), ex3_C(), 0.0, -200.0, -141.0);
  EXPECT_EQ(sw.alpha_policy, "sweep");
  EXPECT_GT(sw.alpha, 70.5);
  EXPECT_TRUE(sw.certificate.overall);
  for (double a : alpha_sweep_grid(-141.0)) {
    const FeasibilityWindow w = feasibility_window(0.0, -200.0, -141.0, a, std::sqrt(2.0));
    EXPECT_LE(w.width(), sw.window.width() + 1e-15);
  }
  EXPECT_EQ(alpha_sweep_grid(-141.0).size(), 40u);
}

TEST(Design, NoFeasibleAlpha) {
  EXPECT_EQ(code_of([] { design_observer(ex3_A(), ex3_C(), 0.0, -200.0, -141.0, 70.0); }),
            ErrorCode::NoFeasibleAlpha);
  EXPECT_EQ(code_of([] { design_observer(ex3_A(), ex3_C(), 0.5, 0.0, 0.0); }), ErrorCode::NoFeasibleAlpha);
}

TEST(MaxAdmissibleRho, Example3) {
  const double r = max_admissible_rho(ex3_A(), ex3_C(), -200.0, -141.0, 70.6);
  EXPECT_NEAR(r, (200.0 - 2.0 * 70.6 * std::sqrt(2.0)) / 0.2, 1e-9);
  EXPECT_NEAR(r, 1.565225, 1e-6);
  // Bisection on window non-emptiness converges to the same supremum.
  double lo = 0.0, hi = 10.0;
  for (int k = 0; k < 100; ++k) {
    const double mid = 0.5 * (lo + hi);
    const bool ok = !feasibility_window(mid, -200.0, -141.0, 70.6, std::sqrt(2.0)).empty;
    (ok ? lo : hi) = mid;
  }
  // The strict slack on the block margin, (width / 2) / (2 alpha) > 1e-9,
  // closes the window slightly before the supremum.
  EXPECT_LE(lo, r);
  EXPECT_NEAR(lo, r, 4.0 * 70.6 * 1e-9 / 0.2 + 1e-9);
  EXPECT_NO_THROW(design_observer(ex3_A(), ex3_C(), r - 1e-5, -200.0, -141.0, 70.6));
  EXPECT_THROW(design_observer(ex3_A(), ex3_C(), r + 1e-6, -200.0, -141.0, 70.6), Error);
}

TEST(MaxAdmissibleRho, SmallCases) {
  EXPECT_LT(max_admissible_rho(ex3_A(), ex3_C(), 0.0, 1.0, 1.0), 0.0);
  EXPECT_NEAR(max_admissible_rho(Matrix::Identity(2, 2), Matrix::Identity(2, 2), -1.0, 0.0, 1.0), 0.5, 1e-15);
}

TEST(IdentityP, Examples) {
  const Matrix I2 = Matrix::Identity(2, 2);
  const IdentityPAnalysis a = identity_P_analysis(Matrix(-2.0 * I2), I2, Matrix::Zero(2, 2), 1.0);
  EXPECT_TRUE(a.sufficient);
  EXPECT_NEAR(a.log_norm, -2.0, 1e-14);

  const IdentityPAnalysis b = identity_P_analysis(ex3_A(), ex3_C(), (Matrix(2, 1) << -1, 1).finished(), 0.0);
  EXPECT_FALSE(b.sufficient);
  EXPECT_NEAR(b.log_norm, (1.0 + std::sqrt(2.0)) / 2.0, 1e-12);
  EXPECT_NEAR(b.max_real_eig, 1.0, 1e-12);
  EXPECT_FALSE(b.necessary);

  const Matrix rot = (Matrix(2, 2) << 0, 1, -1, 0).finished();
  const IdentityPAnalysis c = identity_P_analysis(rot, I2, Matrix::Zero(2, 2), 0.0);
  EXPECT_FALSE(c.sufficient);
  EXPECT_FALSE(c.necessary);
}

TEST(IdentityP, SufficientImpliesNecessary) {
  std::mt19937_64 rng(6);
  for (int k = 0; k < 500; ++k) {
    const int n = ot::uniform_int(rng, 1, 4);
    const Matrix A = ot::random_matrix(rng, n, n) - ot::uniform(rng, 0, 3) * Matrix::Identity(n, n);
    const Matrix C = ot::random_matrix(rng, 1, n);
    const IdentityPAnalysis a = identity_P_analysis(A, C, ot::random_matrix(rng, n, 1), ot::uniform(rng, -1, 1));
    if (a.sufficient) EXPECT_TRUE(a.necessary);
  }
}

TEST(WeightedLmi, Examples) {
  const Matrix I2 = Matrix::Identity(2, 2);
  const Matrix Z = Matrix::Zero(2, 2);
  EXPECT_NEAR(check_weighted_osl_lmi(Matrix(-I2), I2, Z, I2, 0.5), 1.0, 1e-14);
  EXPECT_LT(check_weighted_osl_lmi(Matrix(-I2), I2, Z, I2, 100.0), 0.0);
  EXPECT_NEAR(check_weighted_osl_lmi(Z, I2, Z, I2, 0.0), 0.0, 1e-15);
}
