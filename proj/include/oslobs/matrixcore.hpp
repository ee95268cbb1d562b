#pragma once

// Dense real-matrix kernels for desk-scale problems (n up to ~50).
//
// Everything here is a pure function on Eigen dense types, templated on the
// scalar so expressions can be passed directly (`log_norm2(A - L * C)`).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "oslobs/error.hpp"

namespace oslobs {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixX<double>;
using Vector = VectorX<double>;

inline constexpr double kSymmetryTol = 1e-9;

template <typename Scalar>
struct SymmetricSpectrum {
  VectorX<Scalar> eigenvalues;  // ascending
  Scalar min = Scalar(0);
  Scalar max = Scalar(0);
};

namespace detail {

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& M, const char* what) {
  if (!M.allFinite()) throw Error(ErrorCode::NonFinite, std::string(what) + " has non-finite entries");
}

template <typename Derived>
void require_square(const Eigen::MatrixBase<Derived>& M, const char* what) {
  if (M.rows() != M.cols()) {
    throw Error(ErrorCode::NonSquare, std::string(what) + " is " + std::to_string(M.rows()) + "x" +
                                          std::to_string(M.cols()));
  }
}

/// Cyclic Jacobi on a symmetric matrix (only the values are tracked). Sweeps
/// until the off-diagonal Frobenius mass drops below 1e-14 of the diagonal
/// mass. Returns eigenvalues sorted ascending.
template <typename Scalar>
VectorX<Scalar> jacobi_eigenvalues(MatrixX<Scalar> a) {
  using std::abs;
  using std::sqrt;
  const Eigen::Index n = a.rows();
  constexpr int kMaxSweeps = 100;
  const Scalar rel_tol = Scalar(1e-14);

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    Scalar off = 0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += 2 * a(p, q) * a(p, q);
    const Scalar diag = a.diagonal().squaredNorm();
    if (off == Scalar(0) || sqrt(off) < rel_tol * sqrt(diag)) break;

    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const Scalar apq = a(p, q);
        if (apq == Scalar(0)) continue;
        const Scalar theta = (a(q, q) - a(p, p)) / (2 * apq);
        Scalar t;
        if (abs(theta) > Scalar(1e150)) {
          t = Scalar(1) / (2 * theta);
        } else {
          t = Scalar(1) / (abs(theta) + sqrt(theta * theta + 1));
          if (theta < 0) t = -t;
        }
        const Scalar c = Scalar(1) / sqrt(t * t + 1);
        const Scalar s = t * c;
        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = a(q, p) = 0;
        for (Eigen::Index r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const Scalar g = a(r, p);
          const Scalar h = a(r, q);
          a(r, p) = a(p, r) = c * g - s * h;
          a(r, q) = a(q, r) = s * g + c * h;
        }
      }
    }
  }
  VectorX<Scalar> values = a.diagonal();
  std::sort(values.data(), values.data() + n);
  return values;
}

}  // namespace detail

/// Eigenvalues of the symmetric part of `M`. Throws AsymmetricBeyondTol when
/// max|M - M^T| exceeds `tol`.
template <typename Derived>
SymmetricSpectrum<typename Derived::Scalar> sym_spectrum(const Eigen::MatrixBase<Derived>& M,
                                                         typename Derived::Scalar tol = kSymmetryTol) {
  using Scalar = typename Derived::Scalar;
  detail::require_square(M, "matrix");
  detail::require_finite(M, "matrix");
  const MatrixX<Scalar> m = M;
  if (m.size() > 0 && (m - m.transpose()).cwiseAbs().maxCoeff() > tol) {
    throw Error(ErrorCode::AsymmetricBeyondTol, "asymmetry exceeds tolerance");
  }
  SymmetricSpectrum<Scalar> out;
  out.eigenvalues = detail::jacobi_eigenvalues<Scalar>((m + m.transpose()) / Scalar(2));
  if (out.eigenvalues.size() > 0) {
    out.min = out.eigenvalues(0);
    out.max = out.eigenvalues(out.eigenvalues.size() - 1);
  }
  return out;
}

template <typename Derived>
typename Derived::Scalar lambda_max(const Eigen::MatrixBase<Derived>& M) {
  return sym_spectrum(M).max;
}

template <typename Derived>
typename Derived::Scalar lambda_min(const Eigen::MatrixBase<Derived>& M) {
  return sym_spectrum(M).min;
}

/// sigma_max(M) = sqrt(lambda_max(M^T M)). Works for rectangular M.
template <typename Derived>
typename Derived::Scalar spectral_norm(const Eigen::MatrixBase<Derived>& M) {
  using Scalar = typename Derived::Scalar;
  detail::require_finite(M, "matrix");
  if (M.size() == 0) return Scalar(0);
  const MatrixX<Scalar> m = M;
  // Use the smaller Gram matrix; both share the nonzero spectrum.
  const MatrixX<Scalar> gram = m.rows() < m.cols() ? MatrixX<Scalar>(m * m.transpose())
                                                   : MatrixX<Scalar>(m.transpose() * m);
  const Scalar top = detail::jacobi_eigenvalues<Scalar>(gram).maxCoeff();
  using std::sqrt;
  return sqrt(std::max(top, Scalar(0)));
}

/// Logarithmic norm induced by the 2-norm: lambda_max((M + M^T) / 2).
template <typename Derived>
typename Derived::Scalar log_norm2(const Eigen::MatrixBase<Derived>& M) {
  using Scalar = typename Derived::Scalar;
  detail::require_square(M, "matrix");
  detail::require_finite(M, "matrix");
  const MatrixX<Scalar> m = M;
  return detail::jacobi_eigenvalues<Scalar>((m + m.transpose()) / Scalar(2)).maxCoeff();
}

/// Singular values of M, ascending, via the Gram matrix of the smaller side.
template <typename Derived>
VectorX<typename Derived::Scalar> singular_values(const Eigen::MatrixBase<Derived>& M) {
  using Scalar = typename Derived::Scalar;
  const MatrixX<Scalar> m = M;
  const MatrixX<Scalar> gram = m.rows() <= m.cols() ? MatrixX<Scalar>(m * m.transpose())
                                                    : MatrixX<Scalar>(m.transpose() * m);
  VectorX<Scalar> ev = detail::jacobi_eigenvalues<Scalar>(gram);
  return ev.cwiseMax(Scalar(0)).cwiseSqrt();
}

namespace detail {

template <typename Scalar>
void require_full_row_rank(const MatrixX<Scalar>& c) {
  if (c.rows() == 0 || c.rows() > c.cols()) {
    throw Error(ErrorCode::RankDeficient, "C must have 1 <= p <= n rows");
  }
  const VectorX<Scalar> sv = singular_values(c);
  if (!(sv(0) > Scalar(1e-10) * sv(sv.size() - 1))) {
    throw Error(ErrorCode::RankDeficient, "smallest singular value of C is negligible");
  }
}

}  // namespace detail

namespace detail {

/// Orthonormal basis Q (n x p) and upper-triangular R (p x p) with C^T = Q R.
template <typename Scalar>
std::pair<MatrixX<Scalar>, MatrixX<Scalar>> thin_qr_of_transpose(const MatrixX<Scalar>& c) {
  const Eigen::HouseholderQR<MatrixX<Scalar>> qr(c.transpose());
  const auto p = c.rows(), n = c.cols();
  MatrixX<Scalar> q = qr.householderQ() * MatrixX<Scalar>::Identity(n, p);
  MatrixX<Scalar> r = qr.matrixQR().topRows(p).template triangularView<Eigen::Upper>();
  return {std::move(q), std::move(r)};
}

}  // namespace detail

/// C^+ = C^T (C C^T)^{-1} for full-row-rank C, computed as Q R^{-T} from C^T = Q R.
template <typename Derived>
MatrixX<typename Derived::Scalar> right_pseudo_inverse(const Eigen::MatrixBase<Derived>& C) {
  using Scalar = typename Derived::Scalar;
  detail::require_finite(C, "C");
  const MatrixX<Scalar> c = C;
  detail::require_full_row_rank(c);
  const auto [q, r] = detail::thin_qr_of_transpose(c);
  // X = Q R^{-T}  <=>  R X^T = Q^T
  const MatrixX<Scalar> xt = r.template triangularView<Eigen::Upper>().solve(MatrixX<Scalar>(q.transpose()));
  return xt.transpose();
}

/// Orthogonal projector onto ker(C): I - C^+ C = I - Q Q^T.
template <typename Derived>
MatrixX<typename Derived::Scalar> kernel_projector(const Eigen::MatrixBase<Derived>& C) {
  using Scalar = typename Derived::Scalar;
  detail::require_finite(C, "C");
  const MatrixX<Scalar> c = C;
  detail::require_full_row_rank(c);
  const auto [q, r] = detail::thin_qr_of_transpose(c);
  MatrixX<Scalar> proj = MatrixX<Scalar>::Identity(c.cols(), c.cols()) - q * q.transpose();
  return (proj + proj.transpose()) / Scalar(2);
}

/// True iff lambda_max(M) < -margin. Boundary is excluded.
template <typename Derived>
bool is_negative_definite(const Eigen::MatrixBase<Derived>& M, typename Derived::Scalar margin = 0) {
  return sym_spectrum(M).max < -margin;
}

template <typename Derived>
bool is_positive_definite(const Eigen::MatrixBase<Derived>& M, typename Derived::Scalar margin = 0) {
  return sym_spectrum(M).min > margin;
}

/// Largest real part over the (possibly complex) spectrum of a square matrix.
template <typename Derived>
typename Derived::Scalar max_real_eigenvalue(const Eigen::MatrixBase<Derived>& M) {
  using Scalar = typename Derived::Scalar;
  detail::require_square(M, "matrix");
  detail::require_finite(M, "matrix");
  Eigen::EigenSolver<MatrixX<Scalar>> solver(MatrixX<Scalar>(M), false);
  return solver.eigenvalues().real().maxCoeff();
}

/// Solves M^T P + P M = -Q for P by Kronecker vectorization.
template <typename DerivedM, typename DerivedQ>
MatrixX<typename DerivedM::Scalar> solve_lyapunov(const Eigen::MatrixBase<DerivedM>& M,
                                                  const Eigen::MatrixBase<DerivedQ>& Q) {
  using Scalar = typename DerivedM::Scalar;
  detail::require_square(M, "M");
  detail::require_square(Q, "Q");
  if (M.rows() != Q.rows()) throw Error(ErrorCode::DimensionMismatch, "M and Q differ in size");
  const Eigen::Index n = M.rows();
  const MatrixX<Scalar> id = MatrixX<Scalar>::Identity(n, n);
  MatrixX<Scalar> kron(n * n, n * n);
  // vec(M^T P) = (I kron M^T) vec P ; vec(P M) = (M^T kron I) vec P
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      kron.block(i * n, j * n, n, n) = id(i, j) * M.transpose() + M(j, i) * id;
  const MatrixX<Scalar> rhs = -Q;
  const VectorX<Scalar> vec = kron.fullPivLu().solve(Eigen::Map<const VectorX<Scalar>>(rhs.data(), n * n));
  MatrixX<Scalar> p = Eigen::Map<const MatrixX<Scalar>>(vec.data(), n, n);
  return (p + p.transpose()) / Scalar(2);
}

}  // namespace oslobs
