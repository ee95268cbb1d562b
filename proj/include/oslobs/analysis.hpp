#pragma once

// Certificate checks for a given observer gain L. Each check returns signed
// margins: positive means the inequality holds with room to spare.
//
// The matrix conditions are certified only; the regularity constants behind
// them are valid in the intersection of the one-sided Lipschitz region and the
// QIB region, and every report carries that caveat.

#include <string>
#include <vector>

#include "oslobs/matrixcore.hpp"

namespace oslobs {

/// Absolute slack applied to every strict inequality.
inline constexpr double kStrictSlack = 1e-9;

inline constexpr const char* kRegionCaveat = "valid in the intersection 𝒟 ∩ 𝒟̃";

struct Inequality {
  std::string label;
  double margin = 0.0;
  bool holds = false;
};

struct CertificateReport {
  std::string name;
  std::vector<Inequality> inequalities;
  bool overall = false;
  std::string caveat = kRegionCaveat;

  const Inequality& at(const std::string& label) const;
};

/// Aggregate scalar xi = (beta + 1) + rho (gamma + 2 alpha).
inline double xi_of(double rho, double beta, double gamma, double alpha) {
  return (beta + 1.0) + rho * (gamma + 2.0 * alpha);
}

/// Four labeled margins: thm1.lyap (non-strict), thm1.scalar, thm1.gamma, thm1.kappa.
CertificateReport check_theorem1(const Matrix& A, const Matrix& C, const Matrix& L, const Matrix& P, const Matrix& Q,
                                 double alpha, double rho, double beta, double gamma);

struct Corollary1Report : CertificateReport {
  double block_route = 0.0;  // lambda_min of the 2n x 2n block matrix
  double schur_route = 0.0;  // (lambda - xi) / (2 alpha) - sigma_max(A - LC)
};

/// Margins cor1.block, cor1.gamma, cor1.lambda, cor1.unit.
Corollary1Report check_corollary1(const Matrix& A, const Matrix& C, const Matrix& L, double lambda, double alpha,
                                  double rho, double beta, double gamma);

/// (xi/alpha) lambda_max(P) + lambda_max((A-LC)^T P + P (A-LC) - P/alpha).
/// Negative certifies that V = e^T P e decreases.
double lyapunov_certificate(const Matrix& A, const Matrix& C, const Matrix& L, double alpha, double xi,
                            const Matrix& P);

/// diag(1/lambda, 1, ..., 1): condition number 1/lambda.
Matrix construct_P(double lambda, int n);

/// lambda_min(Q) / (2 lambda_max(P)) - lip, for P, Q > 0 solving
/// (A-LC)^T P + P (A-LC) = -Q. Positive means the classical Lipschitz-observer
/// condition holds for that Lipschitz constant.
double conservative_lipschitz_margin(const Matrix& A, const Matrix& C, const Matrix& L, const Matrix& P,
                                     const Matrix& Q, double lip);

namespace detail {
void require_spd(const Matrix& P, const char* what);
Matrix closed_loop(const Matrix& A, const Matrix& C, const Matrix& L);
}  // namespace detail

}  // namespace oslobs
