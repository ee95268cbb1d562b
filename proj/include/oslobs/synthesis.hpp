#pragma once

// Observer-gain design for x^' = A x^ + phi(x^, u) + L (y - C x^).
//
// The block LMI of the design step is, by Schur complement, the scalar bound
//   sigma_max(A - LC) < (lambda - xi) / (2 alpha).
// For every gain, (A - LC) Pi = A Pi with Pi the projector onto ker C, so
// sigma_max(A - LC) >= sigma_max(A Pi), with equality at L* = A C^+. Hence the
// LMI is feasible for some L iff it is feasible at L*, and the design reduces
// to a closed-form gain plus an interval ("window") of admissible lambda.

#include <optional>
#include <string>
#include <vector>

#include "oslobs/analysis.hpp"

namespace oslobs {

struct MinGain {
  Matrix L;
  double sigma_star = 0.0;  // sigma_max(A - L C) = sigma_max(A Pi)
};

MinGain min_gain(const Matrix& A, const Matrix& C);

struct FeasibilityWindow {
  double lambda_low = 0.0;
  double lambda_high = 1.0;
  bool empty = true;

  double midpoint() const { return 0.5 * (lambda_low + lambda_high); }
  double width() const { return empty ? 0.0 : lambda_high - lambda_low; }
  bool contains(double lambda) const { return !empty && lambda > lambda_low && lambda < lambda_high; }
};

/// Open interval (max(xi + 2 alpha sigma*, 1 - 1/alpha^2, 0), 1). Reported
/// empty when gamma + 2 alpha <= 0, when the interval is empty, or when it is
/// too narrow for the midpoint to clear the strictness slack.
FeasibilityWindow feasibility_window(double rho, double beta, double gamma, double alpha, double sigma_star);

struct ObserverDesign {
  Matrix L;
  double alpha = 0.0;
  double lambda = 0.0;
  double xi = 0.0;
  double sigma_star = 0.0;
  double rho = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  FeasibilityWindow window;
  std::string alpha_policy;  // "given", "alpha_one", or "sweep"
  Corollary1Report certificate;
};

/// Steps 1-4 of the design procedure. Throws StructurallyInfeasible when
/// rho == 0 and beta >= 0, NoFeasibleAlpha when no alpha yields a window.
ObserverDesign design_observer(const Matrix& A, const Matrix& C, double rho, double beta, double gamma,
                               std::optional<double> alpha = std::nullopt);

/// Candidates examined by the automatic alpha sweep (40 log-spaced values).
std::vector<double> alpha_sweep_grid(double gamma);

/// Supremum of rho for which the window is non-empty at this alpha:
/// (-beta - 2 alpha sigma*) / (gamma + 2 alpha). Not attained.
double max_admissible_rho(const Matrix& A, const Matrix& C, double beta, double gamma, double alpha);

struct IdentityPAnalysis {
  double log_norm = 0.0;       // mu(A - LC)
  double max_real_eig = 0.0;   // max Re lambda_i(A - LC)
  bool sufficient = false;     // mu + rho < 0
  double sufficient_margin = 0.0;
  bool necessary = false;      // max Re lambda < -rho
  double necessary_margin = 0.0;
  bool shift_feasible = false; // exists alpha > max Re lambda with rho < -alpha
  double shift_margin = 0.0;
  std::string eigen_method;
};

IdentityPAnalysis identity_P_analysis(const Matrix& A, const Matrix& C, const Matrix& L, double rho);

/// -lambda_max((A-LC)^T P + P (A-LC) + 2 rho I) for a fixed P > 0.
double check_weighted_osl_lmi(const Matrix& A, const Matrix& C, const Matrix& L, const Matrix& P, double rho);

}  // namespace oslobs
