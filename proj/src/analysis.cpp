#include "oslobs/analysis.hpp"

#include <cmath>

namespace oslobs {

namespace detail {

Matrix closed_loop(const Matrix& A, const Matrix& C, const Matrix& L) {
  if (A.rows() != A.cols() || C.cols() != A.rows() || L.rows() != A.rows() || L.cols() != C.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "expected A n x n, C p x n, L n x p");
  }
  return A - L * C;
}

void require_spd(const Matrix& P, const char* what) {
  if (P.rows() != P.cols()) throw Error(ErrorCode::NonSquare, what);
  if (!is_positive_definite(P)) throw Error(ErrorCode::NotPositiveDefinite, std::string(what) + " is not positive definite");
}

}  // namespace detail

const Inequality& CertificateReport::at(const std::string& label) const {
  for (const auto& i : inequalities)
    if (i.label == label) return i;
  throw Error(ErrorCode::PreconditionViolated, "no inequality labeled " + label);
}

namespace {

Inequality strict(std::string label, double margin) { return {std::move(label), margin, margin > kStrictSlack}; }

void finish(CertificateReport& r) {
  r.overall = true;
  for (const auto& i : r.inequalities) r.overall = r.overall && i.holds;
}

}  // namespace

CertificateReport check_theorem1(const Matrix& A, const Matrix& C, const Matrix& L, const Matrix& P, const Matrix& Q,
                                 double alpha, double rho, double beta, double gamma) {
  const Matrix M = detail::closed_loop(A, C, L);
  if (P.rows() != M.rows() || Q.rows() != M.rows() || Q.cols() != M.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "P and Q must be n x n");
  }
  detail::require_spd(P, "P");
  if (!(alpha > 0.0)) throw Error(ErrorCode::PreconditionViolated, "alpha must be > 0");

  const auto p_spec = sym_spectrum(P);
  const double q_min = sym_spectrum(Q).min;
  const double xi = xi_of(rho, beta, gamma, alpha);
  const double kappa = p_spec.max / p_spec.min;

  CertificateReport r;
  r.name = "theorem1";
  const double m1 = -lambda_max(Matrix(M.transpose() * P + P * M + Q));
  r.inequalities.push_back({"thm1.lyap", m1, m1 >= 0.0});
  r.inequalities.push_back(strict("thm1.scalar", alpha * q_min - xi * p_spec.max + p_spec.min));
  r.inequalities.push_back(strict("thm1.gamma", gamma + 2.0 * alpha));
  r.inequalities.push_back(strict("thm1.kappa", alpha * alpha - kappa * (alpha * alpha - 1.0)));
  finish(r);
  return r;
}

Corollary1Report check_corollary1(const Matrix& A, const Matrix& C, const Matrix& L, double lambda, double alpha,
                                  double rho, double beta, double gamma) {
  const Matrix M = detail::closed_loop(A, C, L);
  if (!(alpha > 0.0)) throw Error(ErrorCode::PreconditionViolated, "alpha must be > 0");
  const Eigen::Index n = M.rows();
  const double xi = xi_of(rho, beta, gamma, alpha);
  const double s = (lambda - xi) / (2.0 * alpha);

  Matrix block(2 * n, 2 * n);
  block.topLeftCorner(n, n) = s * Matrix::Identity(n, n);
  block.topRightCorner(n, n) = M.transpose();
  block.bottomLeftCorner(n, n) = M;
  block.bottomRightCorner(n, n) = s * Matrix::Identity(n, n);

  Corollary1Report r;
  r.name = "corollary1";
  r.block_route = lambda_min(block);
  r.schur_route = s - spectral_norm(M);
  r.inequalities.push_back(strict("cor1.block", r.block_route));
  r.inequalities.push_back(strict("cor1.gamma", gamma + 2.0 * alpha));
  r.inequalities.push_back(strict("cor1.lambda", lambda - (1.0 - 1.0 / (alpha * alpha))));
  r.inequalities.push_back(strict("cor1.unit", std::min(lambda, 1.0 - lambda)));
  finish(r);
  return r;
}

double lyapunov_certificate(const Matrix& A, const Matrix& C, const Matrix& L, double alpha, double xi,
                            const Matrix& P) {
  const Matrix M = detail::closed_loop(A, C, L);
  if (P.rows() != M.rows()) throw Error(ErrorCode::DimensionMismatch, "P must be n x n");
  detail::require_spd(P, "P");
  if (!(alpha > 0.0)) throw Error(ErrorCode::PreconditionViolated, "alpha must be > 0");
  const Matrix inner = M.transpose() * P + P * M - P / alpha;
  return (xi / alpha) * lambda_max(P) + lambda_max(inner);
}

Matrix construct_P(double lambda, int n) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw Error(ErrorCode::PreconditionViolated, "lambda must lie in (0, 1)");
  if (n < 2) throw Error(ErrorCode::PreconditionViolated, "construct_P needs n >= 2");
  Matrix P = Matrix::Identity(n, n);
  P(0, 0) = 1.0 / lambda;
  return P;
}

double conservative_lipschitz_margin(const Matrix& A, const Matrix& C, const Matrix& L, const Matrix& P,
                                     const Matrix& Q, double lip) {
  const Matrix M = detail::closed_loop(A, C, L);
  if (P.rows() != M.rows() || Q.rows() != M.rows()) throw Error(ErrorCode::DimensionMismatch, "P, Q must be n x n");
  detail::require_spd(P, "P");
  detail::require_spd(Q, "Q");
  const double residual = (M.transpose() * P + P * M + Q).cwiseAbs().maxCoeff();
  if (residual > 1e-8) {
    throw Error(ErrorCode::EquationResidualTooLarge, "Lyapunov residual " + std::to_string(residual));
  }
  return lambda_min(Q) / (2.0 * lambda_max(P)) - lip;
}

}  // namespace oslobs
