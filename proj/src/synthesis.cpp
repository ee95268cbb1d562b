#include "oslobs/synthesis.hpp"

#include <algorithm>
#include <cmath>

namespace oslobs {

namespace {

constexpr int kSweepSize = 40;

FeasibilityWindow raw_window(double xi, double gamma, double alpha, double sigma_star) {
  FeasibilityWindow w;
  w.lambda_low = std::max({xi + 2.0 * alpha * sigma_star, 1.0 - 1.0 / (alpha * alpha), 0.0});
  w.lambda_high = 1.0;
  w.empty = !(gamma + 2.0 * alpha > 0.0) || !(w.lambda_low < w.lambda_high);
  return w;
}

}  // namespace

MinGain min_gain(const Matrix& A, const Matrix& C) {
  if (A.rows() != A.cols() || C.cols() != A.rows()) throw Error(ErrorCode::DimensionMismatch, "A n x n, C p x n");
  MinGain g;
  g.L = A * right_pseudo_inverse(C);
  g.sigma_star = spectral_norm(Matrix(A * kernel_projector(C)));
  return g;
}

FeasibilityWindow feasibility_window(double rho, double beta, double gamma, double alpha, double sigma_star) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::PreconditionViolated, "alpha must be > 0");
  const double xi = xi_of(rho, beta, gamma, alpha);
  FeasibilityWindow w = raw_window(xi, gamma, alpha, sigma_star);
  if (w.empty) return w;
  // Every strict inequality must clear kStrictSlack at the midpoint.
  const double mid = w.midpoint();
  const bool clears = (mid - xi) / (2.0 * alpha) - sigma_star > kStrictSlack && gamma + 2.0 * alpha > kStrictSlack &&
                      mid - (1.0 - 1.0 / (alpha * alpha)) > kStrictSlack && std::min(mid, 1.0 - mid) > kStrictSlack;
  w.empty = !clears;
  return w;
}

std::vector<double> alpha_sweep_grid(double gamma) {
  double lo, hi;
  if (gamma <= -2.0) {
    lo = -gamma / 2.0 * (1.0 + 1e-4);
    hi = -gamma / 2.0 * 1e3;
  } else {
    // Fallback range when alpha = 1 did not work out.
    const double base = std::max(1.0, std::abs(gamma) / 2.0);
    lo = std::max(1e-3 * base, gamma < 0.0 ? -gamma / 2.0 * (1.0 + 1e-4) : 0.0);
    hi = 1e3 * base;
  }
  std::vector<double> grid(kSweepSize);
  const double llo = std::log(lo), lhi = std::log(hi);
  for (int k = 0; k < kSweepSize; ++k) grid[k] = std::exp(llo + (lhi - llo) * k / (kSweepSize - 1));
  return grid;
}

ObserverDesign design_observer(const Matrix& A, const Matrix& C, double rho, double beta, double gamma,
                               std::optional<double> alpha) {
  // Step 2's structural stop does not depend on alpha.
  if (rho == 0.0 && beta >= 0.0) {
    throw Error(ErrorCode::StructurallyInfeasible, "rho = 0 requires beta < 0");
  }
  const MinGain gain = min_gain(A, C);

  ObserverDesign d;
  auto try_alpha = [&](double a) { return feasibility_window(rho, beta, gamma, a, gain.sigma_star); };

  if (alpha) {
    if (!(*alpha > 0.0)) throw Error(ErrorCode::PreconditionViolated, "alpha must be > 0");
    d.alpha = *alpha;
    d.window = try_alpha(*alpha);
    d.alpha_policy = "given";
    if (d.window.empty) {
      throw Error(ErrorCode::NoFeasibleAlpha, "the lambda window is empty at the given alpha");
    }
  } else {
    bool found = false;
    if (gamma > -2.0) {
      d.window = try_alpha(1.0);
      if (!d.window.empty) {
        d.alpha = 1.0;
        d.alpha_policy = "alpha_one";
        found = true;
      }
    }
    if (!found) {
      double best_width = 0.0;
      for (double a : alpha_sweep_grid(gamma)) {
        const FeasibilityWindow w = try_alpha(a);
        if (!w.empty && w.width() > best_width) {
          best_width = w.width();
          d.alpha = a;
          d.window = w;
          found = true;
        }
      }
      d.alpha_policy = "sweep";
    }
    if (!found) throw Error(ErrorCode::NoFeasibleAlpha, "no alpha in the sweep yields a non-empty window");
  }

  d.L = gain.L;
  d.sigma_star = gain.sigma_star;
  d.rho = rho;
  d.beta = beta;
  d.gamma = gamma;
  d.xi = xi_of(rho, beta, gamma, d.alpha);
  d.lambda = d.window.midpoint();
  d.certificate = check_corollary1(A, C, d.L, d.lambda, d.alpha, rho, beta, gamma);
  return d;
}

double max_admissible_rho(const Matrix& A, const Matrix& C, double beta, double gamma, double alpha) {
  if (!(alpha > 0.0) || !(gamma + 2.0 * alpha > 0.0)) {
    throw Error(ErrorCode::PreconditionViolated, "requires alpha > 0 and gamma + 2 alpha > 0");
  }
  const double sigma_star = min_gain(A, C).sigma_star;
  return (-beta - 2.0 * alpha * sigma_star) / (gamma + 2.0 * alpha);
}

IdentityPAnalysis identity_P_analysis(const Matrix& A, const Matrix& C, const Matrix& L, double rho) {
  const Matrix M = detail::closed_loop(A, C, L);
  IdentityPAnalysis r;
  r.log_norm = log_norm2(M);
  r.max_real_eig = max_real_eigenvalue(M);
  r.eigen_method = "eigen-solver (Hessenberg QR)";
  r.sufficient_margin = -(r.log_norm + rho);
  r.sufficient = r.sufficient_margin > kStrictSlack;
  r.necessary_margin = -rho - r.max_real_eig;
  r.necessary = r.necessary_margin > kStrictSlack;
  // alpha strictly between max Re lambda and -rho exists iff the gap is positive.
  r.shift_margin = r.necessary_margin;
  r.shift_feasible = r.necessary;
  return r;
}

double check_weighted_osl_lmi(const Matrix& A, const Matrix& C, const Matrix& L, const Matrix& P, double rho) {
  const Matrix M = detail::closed_loop(A, C, L);
  if (P.rows() != M.rows() || P.cols() != M.cols()) throw Error(ErrorCode::DimensionMismatch, "P must be n x n");
  detail::require_spd(P, "P");
  const Matrix lhs = M.transpose() * P + P * M + 2.0 * rho * Matrix::Identity(M.rows(), M.rows());
  return -lambda_max(lhs);
}

}  // namespace oslobs
